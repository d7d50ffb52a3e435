use std::net::{Ipv4Addr, SocketAddr};
use std::time::{Duration, Instant};

use sleeper_client::HttpApiClient;
use sleeper_core::agent::StepOutcome;
use sleeper_server::{bind, router, serve, Clock};
use tokio::sync::{mpsc, watch};
use tokio::task::JoinSet;

use crate::runner::{finish, run_script_action, setup, RunError, RunOutput};
use crate::scenario::Scenario;

#[derive(Debug, Clone)]
pub struct LiveOptions {
    pub port: u16,
    pub seed: Option<u64>,
    /// Stop after this long; `None` runs until Ctrl-C.
    pub run_for: Option<Duration>,
}

/// Connection details handed to the operator once the server is listening.
#[derive(Debug, Clone)]
pub struct LiveSession {
    pub addr: SocketAddr,
    /// Bearer tokens for the non-bot accounts.
    pub tokens: Vec<(String, String)>,
}

fn fresh_token() -> String {
    format!("{:016x}{:016x}", rand::random::<u64>(), rand::random::<u64>())
}

/// Live mode: the API listens on `port`, bots poll it over HTTP on wall-clock
/// timers, scripted humans run on their schedules and real people can join
/// with the printed tokens. Nothing here is reproducible.
pub async fn run_live(
    scenario: &Scenario,
    opts: LiveOptions,
    on_ready: impl FnOnce(&LiveSession),
) -> Result<RunOutput, RunError> {
    let started = Instant::now();
    let seed = opts.seed.unwrap_or(scenario.seed);
    let room = setup(scenario, seed, |_| fresh_token())?;
    let listener = bind(SocketAddr::from((Ipv4Addr::UNSPECIFIED, opts.port))).await?;
    let addr = listener.local_addr()?;
    let base = format!("http://127.0.0.1:{}", addr.port());

    let (stop_tx, stop_rx) = watch::channel(false);
    let origin = tokio::time::Instant::now();
    let mut server_stop = stop_rx.clone();
    let server_task = tokio::spawn(serve(
        listener,
        router(room.server.clone(), Clock::wall_from(0)),
        async move {
            let _ = server_stop.wait_for(|s| *s).await;
        },
    ));

    on_ready(&LiveSession {
        addr,
        tokens: room.humans.iter().map(|(h, t)| (h.handle.clone(), t.clone())).collect(),
    });

    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<StepOutcome>();
    let (warn_tx, mut warn_rx) = mpsc::unbounded_channel::<String>();
    let mut tasks = JoinSet::new();

    for mut bot in room.bots {
        let api = HttpApiClient::new(&base, bot.token.clone()).expect("local url");
        let (out_tx, mut stop) = (out_tx.clone(), stop_rx.clone());
        tasks.spawn(async move {
            loop {
                let wake = origin + Duration::from_millis(bot.agent.next_wake_at());
                tokio::select! {
                    _ = tokio::time::sleep_until(wake) => {}
                    _ = stop.wait_for(|s| *s) => break,
                }
                let now = origin.elapsed().as_millis() as u64;
                let outcome = bot.agent.step(&api, bot.backend.as_ref(), now).await;
                tracing::info!(handle = %outcome.handle, performed = outcome.performed.is_some(), "bot cycle");
                if out_tx.send(outcome).is_err() {
                    break;
                }
            }
        });
    }

    for (spec, token) in room.humans {
        if spec.script.is_empty() {
            continue;
        }
        let api = HttpApiClient::new(&base, token).expect("local url");
        let (server, warn_tx, mut stop) = (room.server.clone(), warn_tx.clone(), stop_rx.clone());
        tasks.spawn(async move {
            for (i, step) in spec.script.iter().enumerate() {
                tokio::select! {
                    _ = tokio::time::sleep_until(origin + Duration::from_millis(step.at_ms)) => {}
                    _ = stop.wait_for(|s| *s) => break,
                }
                if let Err(e) = run_script_action(&server, &api, &step.action).await {
                    let _ = warn_tx.send(format!("{} script step {i} skipped: {e}", spec.handle));
                }
            }
        });
    }
    drop((out_tx, warn_tx));

    match opts.run_for {
        Some(d) => tokio::select! {
            _ = tokio::time::sleep(d) => {}
            _ = tokio::signal::ctrl_c() => {}
        },
        None => {
            let _ = tokio::signal::ctrl_c().await;
        }
    }
    let _ = stop_tx.send(true);
    while tasks.join_next().await.is_some() {}
    let _ = server_task.await;

    let mut outcomes = Vec::new();
    while let Ok(o) = out_rx.try_recv() {
        outcomes.push(o);
    }
    let mut warnings = vec!["live runs are not reproducible".to_string()];
    while let Ok(w) = warn_rx.try_recv() {
        warnings.push(w);
    }
    let store = {
        let mut s = room.server.lock().expect("server lock");
        std::mem::take(s.store_mut())
    };
    Ok(finish(store, outcomes, warnings, &scenario.claims, started))
}
