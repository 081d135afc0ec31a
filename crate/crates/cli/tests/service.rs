use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use obdax::service::{app, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

const Q1: &str = "q(?x) :- CulturEvent(?x).";
const Q2: &str = "q(?x) :- Concert(?x), occursIn(?x,?y), ?y = Vienna.";
const RESTRAIN: &str = "q(?x) :- Event(?x), occursIn(?x,?y), City(?y).";

async fn call(router: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = router.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn post(router: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(router, Method::POST, uri, Some(body)).await
}

async fn load(router: &Router, text: &str) -> String {
    let (status, v) = post(router, "/api/kb", json!({"kb_text": text})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    v["kb_id"].as_str().unwrap().to_string()
}

fn router() -> Router {
    app(AppState::default())
}

#[tokio::test]
async fn summary_of_unknown_kb_is_not_found() {
    let r = router();
    let (status, _) = call(&r, Method::GET, "/api/kb/kb-1/summary", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = post(&r, "/api/kb/nope/answers", json!({"query": Q1})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn loading_reports_class_and_dimensions() {
    let r = router();
    let (status, v) = post(&r, "/api/kb", json!({"kb_text": fixture("events_cri.dlhr")})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["class"], "recursion-safe");
    assert_eq!(v["consistent"], true);
    assert_eq!(v["admissibility"]["admissible"], true);
    assert_eq!(v["ell"], 3);
    let id = v["kb_id"].as_str().unwrap();
    let (status, s) = call(&r, Method::GET, &format!("/api/kb/{id}/summary"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s["kb_id"], id);
    assert_eq!(s["recursive_roles"], json!(["occursIn"]));
    assert!(s["concepts"].as_array().unwrap().contains(&json!("Concert")));

    let (_, v) = post(&r, "/api/kb", json!({"kb_text": fixture("events.dlhr")})).await;
    assert_eq!(v["class"], "non-recursive");
    assert_eq!(v["admissibility"], Value::Null);
    assert_ne!(v["kb_id"], json!(id));
}

#[tokio::test]
async fn cri_query_answers_c1_exactly() {
    let r = router();
    let id = load(&r, &fixture("events_cri.dlhr")).await;
    let (status, v) = post(&r, &format!("/api/kb/{id}/answers"), json!({"query": Q2})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    assert_eq!(v["answers"], json!([["c1"]]));
    assert_eq!(v["exact"], true);
    assert_eq!(v["method"], "k-rewrite");
    assert!(v["rewriting_size"].as_u64().unwrap() > 0);
    let (_, v2) = post(&r, &format!("/api/kb/{id}/answers"), json!({"query": Q2, "k": 2})).await;
    assert_eq!(v2["answers"], json!([["c1"]]));
    let (status, _) = post(&r, &format!("/api/kb/{id}/answers"), json!({"query": Q2, "method": "rewrite"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = post(&r, &format!("/api/kb/{id}/answers"), json!({"query": Q2, "method": "magic"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn restrain_moves_cite_their_axioms_and_apply() {
    let r = router();
    let id = load(&r, &fixture("events.dlhr")).await;
    let (status, v) =
        post(&r, &format!("/api/kb/{id}/moves"), json!({"query": RESTRAIN, "direction": "restrain", "data_driven": false})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let moves = v["moves"].as_array().unwrap();
    let s1 = moves
        .iter()
        .find(|m| m["rule"] == "S1" && m["description"].as_str().unwrap().contains("CulturEvent ⊑ Event"))
        .expect("S1 move with CulturEvent ⊑ Event");
    assert_eq!(s1["result_query"], "q(?x) :- CulturEvent(?x), occursIn(?x,?y), City(?y).");
    let (status, a) = post(&r, &format!("/api/kb/{id}/apply"), json!({"query": RESTRAIN, "move_id": s1["id"]})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(a["query"], s1["result_query"]);
    let (status, _) = post(&r, &format!("/api/kb/{id}/apply"), json!({"query": Q1, "move_id": s1["id"]})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn moves_from_an_older_version_are_gone() {
    let r = router();
    let id = load(&r, &fixture("events.dlhr")).await;
    let (_, v) = post(&r, &format!("/api/kb/{id}/moves"), json!({"query": RESTRAIN, "direction": "restrain"})).await;
    let token = v["moves"][0]["id"].clone();
    assert!(token.as_str().unwrap().ends_with(".v1"));
    let (status, v) = call(&r, Method::PUT, &format!("/api/kb/{id}"), Some(json!({"kb_text": fixture("events.dlhr")}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["version"], 2);
    let (status, _) = post(&r, &format!("/api/kb/{id}/apply"), json!({"query": RESTRAIN, "move_id": token})).await;
    assert_eq!(status, StatusCode::GONE);
    let (_, v) = post(&r, &format!("/api/kb/{id}/moves"), json!({"query": RESTRAIN, "direction": "restrain"})).await;
    let fresh = v["moves"][0]["id"].as_str().unwrap();
    assert!(fresh.ends_with(".v2"));
    assert_eq!(fresh.split_once('.').unwrap().0, token.as_str().unwrap().split_once('.').unwrap().0);
    let (status, _) = post(&r, &format!("/api/kb/{id}/apply"), json!({"query": RESTRAIN, "move_id": fresh})).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn errors_map_to_status_codes() {
    let r = router();
    let (status, v) = post(&r, "/api/kb", json!({"kb_text": "Concert sub\n"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(v["diagnostics"][0]["line"], 1);
    let (status, _) = post(&r, "/api/kb", json!({"text": "A sub B."})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let id = load(&r, &fixture("events.dlhr")).await;
    let (status, v) = post(&r, &format!("/api/kb/{id}/answers"), json!({"query": "q(?x) :- Concert(?x"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["diagnostics"][0]["column"].as_u64().unwrap() >= 1);

    let (status, v) = post(&r, "/api/kb", json!({"kb_text": fixture("inconsistent.dlhr")})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["consistent"], false);
    let bad = v["kb_id"].as_str().unwrap();
    let (status, v) = post(&r, &format!("/api/kb/{bad}/answers"), json!({"query": Q1})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert!(v["error"].as_str().unwrap().contains("disj(Concert, Exhibition)"));
    let (status, _) = post(&r, &format!("/api/kb/{bad}/moves"), json!({"query": Q1, "direction": "relax"})).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let general = load(&r, "r o s sub r.\nsimple s.\nA sub exists s.\nA(a).\nr(a, b).\n").await;
    let (status, _) = post(&r, &format!("/api/kb/{general}/answers"), json!({"query": "q(?x) :- r(?x,?y)."})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn navigation_returns_chains() {
    let r = router();
    let id = load(&r, &fixture("events_cri.dlhr")).await;
    let (status, v) = post(&r, &format!("/api/kb/{id}/navigate"), json!({"query": Q2, "var": "?y", "direction": "up"})).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    let chain = &v["chains"][0];
    assert_eq!(chain["from_category"], json!(["City"]));
    assert_eq!(chain["to_category"], json!(["Country"]));
    assert!(chain["result_query"].as_str().unwrap().contains("= Austria"));
    let (status, v) = post(&r, &format!("/api/kb/{id}/answers"), json!({"query": chain["result_query"]})).await;
    assert_eq!(status, StatusCode::OK);
    assert!(v["answers"].as_array().unwrap().contains(&json!(["c1"])));
    let (status, _) = post(&r, &format!("/api/kb/{id}/navigate"), json!({"query": Q2, "var": "?x", "direction": "up"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = post(&r, &format!("/api/kb/{id}/navigate"), json!({"query": Q2, "var": "?y", "direction": "sideways"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn answers_are_independent_of_request_order() {
    let queries = [Q1, Q2, "q(?x) :- Event(?x).", "q(?x,?y) :- occursIn(?x,?y)."];
    let mut orders = Vec::new();
    for order in [[0, 1, 2, 3], [3, 2, 1, 0], [2, 0, 3, 1]] {
        let r = router();
        let id = load(&r, &fixture("events_cri.dlhr")).await;
        let mut results = vec![Value::Null; queries.len()];
        for i in order {
            let (status, v) = post(&r, &format!("/api/kb/{id}/answers"), json!({"query": queries[i]})).await;
            assert_eq!(status, StatusCode::OK, "{v}");
            results[i] = v["answers"].clone();
        }
        orders.push(results);
    }
    assert!(orders.windows(2).all(|w| w[0] == w[1]));

    let r = router();
    let id = load(&r, &fixture("events_cri.dlhr")).await;
    let tasks: Vec<_> = (0..8)
        .map(|i| {
            let r = r.clone();
            let uri = format!("/api/kb/{id}/answers");
            let q = queries[i % queries.len()];
            tokio::spawn(async move { (i % queries.len(), post(&r, &uri, json!({"query": q})).await.1["answers"].clone()) })
        })
        .collect();
    for t in tasks {
        let (i, answers) = t.await.unwrap();
        assert_eq!(answers, orders[0][i]);
    }
}
