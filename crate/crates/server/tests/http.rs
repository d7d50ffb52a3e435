use std::collections::BTreeSet;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use serde_json::{json, Value};
use sleeper_core::agent::SharedServer;
use sleeper_core::api::ApiServer;
use sleeper_core::social::AccountKind;
use sleeper_server::{bind, router, serve, Clock, ServeError};

async fn start(clock: Clock) -> (SharedServer, String) {
    let mut s = ApiServer::new();
    s.register("avery", "Avery", AccountKind::Bot, "t-avery").unwrap();
    s.register("paul", "Paul", AccountKind::Facilitator, "t-paul").unwrap();
    let shared = Arc::new(Mutex::new(s));
    let listener = bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, router(shared.clone(), clock), std::future::pending()));
    (shared, format!("http://{addr}"))
}

async fn post(base: &str, token: &str, path: &str, body: Value) -> (u16, Value) {
    let r = reqwest::Client::new()
        .post(format!("{base}{path}"))
        .bearer_auth(token)
        .json(&body)
        .send()
        .await
        .unwrap();
    (r.status().as_u16(), r.json().await.unwrap())
}

async fn get(base: &str, token: &str, path: &str) -> (u16, Value) {
    let r = reqwest::Client::new()
        .get(format!("{base}{path}"))
        .bearer_auth(token)
        .send()
        .await
        .unwrap();
    (r.status().as_u16(), r.json().await.unwrap())
}

fn field_names(v: &Value) -> BTreeSet<String> {
    match v {
        Value::Object(m) => m
            .iter()
            .flat_map(|(k, v)| {
                std::iter::once(k.clone()).chain(field_names(v).into_iter().map(move |f| format!("{k}.{f}")))
            })
            .collect(),
        _ => BTreeSet::new(),
    }
}

#[tokio::test]
async fn missing_or_bad_token_is_401() {
    let (_, base) = start(Clock::Manual).await;
    let r = reqwest::get(format!("{base}/api/v1/timelines/home")).await.unwrap();
    assert_eq!(r.status().as_u16(), 401);
    assert_eq!(get(&base, "nope", "/api/v1/notifications").await.0, 401);
}

#[tokio::test]
async fn post_and_limits() {
    let (shared, base) = start(Clock::Manual).await;
    let (status, view) = post(&base, "t-paul", "/api/v1/statuses", json!({"status": "hi", "in_reply_to_id": null})).await;
    assert_eq!(status, 200);
    assert_eq!(view["content"], "hi");
    assert_eq!(view["account"]["handle"], "paul");

    let (status, _) = post(&base, "t-paul", "/api/v1/statuses", json!({"status": "a".repeat(501)})).await;
    assert_eq!(status, 422);
    let (status, _) = post(&base, "t-paul", "/api/v1/statuses", json!({"status": "é".repeat(500)})).await;
    assert_eq!(status, 200);
    assert_eq!(shared.lock().unwrap().store().posts().len(), 2);

    let r = reqwest::Client::new()
        .post(format!("{base}/api/v1/statuses"))
        .bearer_auth("t-paul")
        .body("{not json")
        .send()
        .await
        .unwrap();
    assert_eq!(r.status().as_u16(), 400);
}

#[tokio::test]
async fn timeline_limit_over_http() {
    let (shared, base) = start(Clock::Manual).await;
    for i in 0..100u64 {
        let mut s = shared.lock().unwrap();
        s.store_mut().advance_to(i * 10).unwrap();
        let author = if i % 2 == 0 { "avery" } else { "paul" };
        let id = s.store().account_by_handle(author).unwrap().id;
        s.store_mut().append_post(id, &format!("post {i}"), None).unwrap();
    }
    let (status, page) = get(&base, "t-avery", "/api/v1/timelines/home?limit=30").await;
    assert_eq!(status, 200);
    let ids: Vec<u64> = page.as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap().parse().unwrap()).collect();
    assert_eq!(ids, (71..=100).rev().collect::<Vec<u64>>());
    let (_, capped) = get(&base, "t-avery", "/api/v1/timelines/home?limit=500").await;
    assert_eq!(capped.as_array().unwrap().len(), 40);
    assert_eq!(get(&base, "t-avery", "/api/v1/timelines/home?limit=zero").await.0, 400);
}

#[tokio::test]
async fn bot_and_human_statuses_look_the_same() {
    let (_, base) = start(Clock::Manual).await;
    let (_, bot) = post(&base, "t-avery", "/api/v1/statuses", json!({"status": "@paul hello"})).await;
    let (_, human) = post(&base, "t-paul", "/api/v1/statuses", json!({"status": "hey"})).await;
    assert_eq!(field_names(&bot), field_names(&human));
    assert!(!bot.to_string().contains("bot"));

    let (_, notes) = get(&base, "t-paul", "/api/v1/notifications?unread=true").await;
    let n = &notes[0];
    assert_eq!(n["type"], "mention");
    assert!(field_names(n).iter().all(|f| !f.contains("kind")));
}

#[tokio::test]
async fn favourite_and_follow() {
    let (_, base) = start(Clock::Manual).await;
    let (_, s) = post(&base, "t-paul", "/api/v1/statuses", json!({"status": "hi"})).await;
    let id = s["id"].as_str().unwrap();
    let (status, fav) = post(&base, "t-avery", &format!("/api/v1/statuses/{id}/favourite"), Value::Null).await;
    assert_eq!(status, 200);
    assert_eq!(fav["favourites_count"], 1);
    let (status, f) = post(&base, "t-avery", "/api/v1/accounts/2/follow", Value::Null).await;
    assert_eq!(status, 200);
    assert_eq!(f, json!({"id": "2", "following": true}));
    assert_eq!(post(&base, "t-avery", "/api/v1/statuses/99/favourite", Value::Null).await.0, 404);
}

#[tokio::test]
async fn wall_clock_advances_the_store() {
    let (shared, base) = start(Clock::wall_from(5_000)).await;
    let (_, s) = post(&base, "t-paul", "/api/v1/statuses", json!({"status": "hi"})).await;
    assert!(s["created_at"].as_u64().unwrap() >= 5_000);
    assert!(shared.lock().unwrap().store().now() >= 5_000);
}

#[tokio::test]
async fn occupied_port_is_reported() {
    let first = bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.unwrap();
    let addr = first.local_addr().unwrap();
    match bind(addr).await {
        Err(ServeError::PortInUse(p)) => assert_eq!(p, addr.port()),
        other => panic!("{other:?}"),
    }
}
