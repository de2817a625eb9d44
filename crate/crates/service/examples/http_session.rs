//! Drive the HTTP API in-process: upload the ten-vertex example, start a
//! kBM-DP session and answer as a person looking for v5 and v8 would.
//!
//! `cargo run -p kbm-igs-service --example http_session`

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use kbm_igs::fixtures::{toy10, TOY10_EDGES};
use kbm_igs::oracle::truthful_answer;
use kbm_igs::TargetSet;
use kbm_igs_service::{router, Step, Store};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn post(app: &axum::Router, uri: &str, ctype: &str, body: String) -> Value {
    let req = Request::post(uri).header("content-type", ctype).body(Body::from(body)).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let bytes = axum::body::to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::main]
async fn main() {
    let app = router(Arc::new(Store::in_memory()));
    let created = post(&app, "/hierarchies", "text/plain", TOY10_EDGES.to_string()).await;
    println!("POST /hierarchies -> {created}");

    let body = json!({"hierarchy_id": created["hierarchy_id"], "algo": "kbm-dp", "b": 2, "k": 2});
    let mut step: Step = serde_json::from_value(post(&app, "/sessions", "application/json", body.to_string()).await).unwrap();
    let h = toy10();
    let hidden = TargetSet::from_labels(&h, &["v5", "v8"]).unwrap();
    while let Some(q) = step.question.clone() {
        let yes = truthful_answer(&h, &hidden, h.lookup(&q.vertex).unwrap()).is_yes();
        let answer = if yes { "yes" } else { "no" };
        println!("question {} ({}) -> {answer}", q.label, q.path.join(" > "));
        let uri = format!("/sessions/{}/answer", step.session_id);
        let body = json!({"answer": answer, "token": step.token});
        step = serde_json::from_value(post(&app, &uri, "application/json", body.to_string()).await).unwrap();
    }
    let picks: Vec<String> = step.selections.unwrap_or_default().into_iter().map(|s| s.label).collect();
    println!("selections {picks:?}, penalty against the remaining candidates {:?}", step.penalty_vs_potential);
}
