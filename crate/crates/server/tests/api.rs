use std::time::Duration;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use brnet_core::equilibria::count_path_equilibria_golden;
use brnet_core::sweep::{sweep, to_csv, DeltaGrid, SweepSpec};
use brnet_server::{router, ServerConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app() -> Router {
    router(ServerConfig::default())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(match body {
            Some(v) => Body::from(v.to_string()),
            None => Body::empty(),
        })
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn call_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

async fn wait(app: &Router, id: &str) -> Value {
    for _ in 0..2000 {
        let (s, v) = call_json(app, "GET", &format!("/api/jobs/{id}?rows=false"), None).await;
        assert_eq!(s, StatusCode::OK);
        if v["status"] == "done" || v["status"] == "failed" {
            return v;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("job {id} did not finish");
}

#[tokio::test]
async fn simulate_is_idempotent() {
    let app = app();
    let body = json!({"graph": "path:5", "delta": 0.99, "seed": 7});
    let (s1, a) = call(&app, "POST", "/api/simulate", Some(body.clone())).await;
    let (s2, b) = call(&app, "POST", "/api/simulate", Some(body)).await;
    assert_eq!((s1, s2), (StatusCode::OK, StatusCode::OK));
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    for key in ["converged", "rounds", "last_change_round", "reshuffles", "active_changes", "terminal", "residuals"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["reshuffles"].is_array());
    assert_eq!(v["terminal"].as_array().unwrap().len(), 5);
}

#[tokio::test]
async fn single_agent_converges_in_one_round() {
    let (s, v) = call_json(&app(), "POST", "/api/simulate", Some(json!({"graph": "path:1", "delta": 0.3}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["converged"], true);
    assert!(v["rounds"].as_f64().unwrap() <= 1.0);
}

#[tokio::test]
async fn error_statuses() {
    let app = app();
    let cases = [
        (json!({"graph": "path:0"}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"graph": "path:0", "delta": 0.5}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"graph": "rr:7:3"}), StatusCode::UNPROCESSABLE_ENTITY),
        (json!({"graph": "path:5"}), StatusCode::BAD_REQUEST),
        (json!({"graph": "path:5", "delta": 1.5}), StatusCode::BAD_REQUEST),
        (json!({"graph": "blob:5", "delta": 0.5}), StatusCode::BAD_REQUEST),
        (json!({"graph": "path:5", "delta": 0.5, "bogus": 1}), StatusCode::BAD_REQUEST),
        (json!({"graph": "path:2001", "delta": 0.5}), StatusCode::PAYLOAD_TOO_LARGE),
        (json!({"graph": "er:100000000:0.5", "delta": 0.5}), StatusCode::PAYLOAD_TOO_LARGE),
    ];
    for (body, want) in cases {
        let (s, v) = call_json(&app, "POST", "/api/simulate", Some(body.clone())).await;
        assert_eq!(s, want, "{body}");
        assert!(v["error"].is_string());
    }
    let (s, _) = call(&app, "POST", "/api/simulate", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "GET", "/api/jobs/nope", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "POST", "/api/jobs/nope/cancel", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "GET", "/api/jobs/nope/result", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sweep_validation() {
    let app = router(ServerConfig {
        sweep_budget: 100,
        ..ServerConfig::default()
    });
    let (s, _) = call(&app, "POST", "/api/sweep", Some(json!({"graph": "path:3", "trials": 0}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "POST", "/api/sweep", Some(json!({"graph": "path:3"}))).await;
    assert_eq!(s, StatusCode::TOO_MANY_REQUESTS);
    let (s, _) = call(&app, "POST", "/api/sweep", Some(json!({"preset": "fig-nope"}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "POST", "/api/sweep", Some(json!({"graph": "path:0", "trials": 1}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let grid = json!({"start": 0.9, "end": 0.1, "step": 0.1});
    let (s, _) = call(&app, "POST", "/api/sweep", Some(json!({"graph": "path:3", "delta_grid": grid}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn sweep_job_matches_library() {
    let app = app();
    let body = json!({
        "graph": "path:4",
        "delta_grid": {"start": 0.1, "end": 0.9, "step": 0.2},
        "trials": 3,
        "base_seed": 11
    });
    let (s, handle) = call_json(&app, "POST", "/api/sweep", Some(body)).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    assert_eq!(handle["kind"], "sweep");
    let id = handle["id"].as_str().unwrap().to_string();
    let done = wait(&app, &id).await;
    assert_eq!(done["status"], "done");
    assert_eq!(done["progress"], 1.0);
    assert_eq!(done["done_cells"], 15);

    let (s, csv) = call(&app, "GET", &format!("/api/jobs/{id}/result"), None).await;
    assert_eq!(s, StatusCode::OK);
    let spec = SweepSpec::new(
        "path:4",
        DeltaGrid::Range {
            start: 0.1,
            end: 0.9,
            step: 0.2,
        },
        3,
    )
    .with_seed(11);
    assert_eq!(String::from_utf8(csv).unwrap(), to_csv(&sweep(&spec).unwrap()));

    let (_, status) = call_json(&app, "GET", &format!("/api/jobs/{id}"), None).await;
    assert_eq!(status["partial"][0]["rows"].as_array().unwrap().len(), 15);
    let (s, table) = call_json(&app, "GET", &format!("/api/jobs/{id}/result?format=json"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(table["tables"][0]["graph"], "path:4");
    let (s, _) = call(&app, "GET", &format!("/api/jobs/{id}/result?format=xml"), None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn multi_sweep_preset_has_sweep_column() {
    let app = app();
    let (s, handle) =
        call_json(&app, "POST", "/api/sweep", Some(json!({"preset": "fig-cospectral", "trials": 1}))).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let id = handle["id"].as_str().unwrap().to_string();
    assert_eq!(wait(&app, &id).await["status"], "done");
    let (_, csv) = call(&app, "GET", &format!("/api/jobs/{id}/result"), None).await;
    let csv = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("sweep,delta,"));
    assert_eq!(lines.len(), 1 + 2 * 201);
    assert!(lines[1].starts_with("star,"));
    assert!(lines[202].starts_with("mate,"));
}

#[tokio::test]
async fn cancelling_a_running_sweep() {
    let app = app();
    let body = json!({"graph": "path:200", "trials": 50, "epsilon": 1e-9});
    let (_, handle) = call_json(&app, "POST", "/api/sweep", Some(body)).await;
    let id = handle["id"].as_str().unwrap().to_string();
    let (s, after) = call_json(&app, "POST", &format!("/api/jobs/{id}/cancel"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(after["status"], "failed");
    assert_eq!(after["reason"], "cancelled");
    tokio::time::sleep(Duration::from_millis(50)).await;
    let (_, later) = call_json(&app, "GET", &format!("/api/jobs/{id}?rows=false"), None).await;
    assert_eq!(later["status"], "failed");
    assert_eq!(later["reason"], "cancelled");
    let (s, _) = call(&app, "GET", &format!("/api/jobs/{id}/result"), None).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test]
async fn async_simulation_matches_sync() {
    let app = app();
    let body = json!({"graph": "cycle:9", "delta": 0.7, "seed": 3, "record": "full"});
    let (_, sync) = call_json(&app, "POST", "/api/simulate", Some(body.clone())).await;
    let mut forced = body;
    forced["async"] = json!(true);
    let (s, handle) = call_json(&app, "POST", "/api/simulate", Some(forced)).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    assert_eq!(handle["kind"], "simulate");
    let id = handle["id"].as_str().unwrap().to_string();
    assert_eq!(wait(&app, &id).await["status"], "done");
    let (_, result) = call_json(&app, "GET", &format!("/api/jobs/{id}/result"), None).await;
    assert_eq!(result, sync);
    let traces = sync["traces"].as_array().unwrap();
    assert_eq!(traces.len(), 9);
    assert!(traces.iter().all(|t| t.as_array().unwrap().len() <= 2000));
}

#[tokio::test]
async fn large_simulations_become_jobs() {
    let app = router(ServerConfig {
        sync_step_limit: 10,
        ..ServerConfig::default()
    });
    let (s, v) = call_json(&app, "POST", "/api/simulate", Some(json!({"graph": "path:3", "delta": 0.4}))).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    assert_eq!(v["status"], "queued");
}

#[tokio::test]
async fn scenario_replay() {
    let body = json!({"graph": "chain:3:0.99", "replay": true, "epsilon": 1e-9});
    let (s, v) = call_json(&app(), "POST", "/api/simulate", Some(body)).await;
    assert_eq!(s, StatusCode::OK);
    let agents: Vec<u64> = v["reshuffles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[1].as_u64().unwrap())
        .collect();
    assert_eq!(agents, vec![2, 7, 12]);
    let (s, _) = call(&app(), "POST", "/api/simulate", Some(json!({"graph": "path:3", "delta": 0.5, "replay": true}))).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn graph_endpoint() {
    let app = app();
    let (s, v) = call_json(&app, "GET", "/api/graph?spec=path:3", None).await;
    assert_eq!(s, StatusCode::OK);
    let spectrum: Vec<f64> = serde_json::from_value(v["spectrum"].clone()).unwrap();
    let r2 = 2f64.sqrt();
    for (got, want) in spectrum.iter().zip([-r2, 0.0, r2]) {
        assert!((got - want).abs() < 1e-9);
    }
    assert_eq!(v["n"], 3);

    let (_, v) = call_json(&app, "GET", "/api/graph?spec=kml:4:1", None).await;
    let first = &v["threshold_lines"][0];
    assert!((first["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    assert_eq!(first["sign"], "negative");

    let (_, v) = call_json(&app, "GET", "/api/graph?spec=p5slow:0.9", None).await;
    assert!(v["scenario"]["schedule"].is_array());

    let (s, _) = call(&app, "GET", "/api/graph", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "GET", "/api/graph?spec=path:0", None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call(&app, "GET", "/api/graph?spec=path:99999", None).await;
    assert_eq!(s, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn equilibria_endpoint() {
    let app = app();
    let (s, v) = call_json(&app, "GET", "/api/equilibria?spec=path:5&delta=0.7", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["method"], "brute-force");
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["set"], json!([0, 2, 4]));
    assert_eq!(reports[0]["stable"], "stable");

    let (_, v) = call_json(&app, "GET", "/api/equilibria?spec=path:30&delta=0.9", None).await;
    assert_eq!(v["method"], "structural");
    assert_eq!(v["count"].as_u64().unwrap() as u128, count_path_equilibria_golden(30).unwrap());

    let (s, _) = call(&app, "GET", "/api/equilibria?spec=path:5", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = call(&app, "GET", "/api/equilibria?spec=path:5&delta=2", None).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn cors_headers_present() {
    let req = Request::builder()
        .method("GET")
        .uri("/api/health")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert!(resp.headers().contains_key("access-control-allow-origin"));
}

#[tokio::test]
async fn presets_listed() {
    let (s, v) = call_json(&app(), "GET", "/api/presets", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v.as_array().unwrap().len(), 16);
    assert_eq!(v[1]["sweeps"][0]["graph"], "path:2");
}
