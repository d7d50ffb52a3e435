use std::time::Duration;

use sleeper_client::HttpApiClient;
use sleeper_core::agent::ApiClient;
use sleeper_harness::{default_scenario, run_live, HumanKind, HumanSpec, LiveOptions, ScriptAction, ScriptedAction};

#[tokio::test(flavor = "multi_thread")]
async fn bots_and_people_share_a_live_room() {
    let mut s = default_scenario();
    s.bots.truncate(2);
    for b in &mut s.bots {
        b.persona.base_interval_ms = 150;
        b.persona.jitter_fraction = 0.2;
    }
    s.humans = vec![
        HumanSpec {
            handle: "paul".into(),
            display_name: None,
            kind: HumanKind::Facilitator,
            script: vec![ScriptedAction {
                at_ms: 100,
                action: ScriptAction::Post { body: "@avery morning".into() },
            }],
        },
        HumanSpec {
            handle: "guest".into(),
            display_name: None,
            kind: HumanKind::Human,
            script: vec![],
        },
    ];

    let (tx, rx) = tokio::sync::oneshot::channel();
    let opts = LiveOptions {
        port: 0,
        seed: None,
        run_for: Some(Duration::from_millis(1_500)),
    };
    let run = tokio::spawn(async move {
        run_live(&s, opts, move |session| {
            let _ = tx.send(session.clone());
        })
        .await
    });
    let session = rx.await.unwrap();
    assert_eq!(session.tokens.len(), 2);
    let (_, guest_token) = session.tokens.iter().find(|(h, _)| h == "guest").unwrap();
    let guest = HttpApiClient::new(&format!("http://127.0.0.1:{}", session.addr.port()), guest_token.clone()).unwrap();
    tokio::time::sleep(Duration::from_millis(300)).await;
    guest.post_status("hi, new here", None).await.unwrap();

    let out = run.await.unwrap().unwrap();
    assert!(out.summary.bot_posts > 0, "{:?}", out.warnings);
    assert!(out.store.posts().iter().any(|p| p.body == "hi, new here"));
    assert!(out.store.posts().iter().any(|p| p.body == "@avery morning"));
    let replayed = sleeper_core::social::Store::replay(out.store.log().entries()).unwrap();
    assert_eq!(replayed.log().to_jsonl(), out.events_jsonl());
}
