#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;

use luxen::server::{router, AppState};
use serde_json::Value;

pub struct Server {
    pub base: String,
    pub state: Arc<AppState>,
    pub client: reqwest::Client,
}

impl Server {
    pub async fn start(state: Arc<AppState>) -> Server {
        let listener = tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], 0))).await.unwrap();
        let addr = listener.local_addr().unwrap();
        let app = router(state.clone());
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        Server { base: format!("http://{addr}"), state, client: reqwest::Client::new() }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn session(&self) -> u64 {
        let r = self.client.post(self.url("/sessions")).send().await.unwrap();
        assert_eq!(r.status(), 201);
        r.json::<Value>().await.unwrap()["session_id"].as_u64().unwrap()
    }

    pub async fn upload(&self, session: u64, csv: &str) -> reqwest::Response {
        self.client
            .post(self.url(&format!("/sessions/{session}/frames")))
            .header("content-type", "text/csv")
            .body(csv.to_string())
            .send()
            .await
            .unwrap()
    }

    pub async fn frame(&self, session: u64, csv: &str) -> u64 {
        let r = self.upload(session, csv).await;
        assert_eq!(r.status(), 201);
        r.json::<Value>().await.unwrap()["frame_id"].as_u64().unwrap()
    }

    pub async fn intent(&self, frame: u64, clauses: &[&str]) -> reqwest::Response {
        self.client.put(self.url(&format!("/frames/{frame}/intent"))).json(&clauses).send().await.unwrap()
    }

    pub async fn transform(&self, frame: u64, body: Value) -> reqwest::Response {
        self.client.post(self.url(&format!("/frames/{frame}/transform"))).json(&body).send().await.unwrap()
    }

    /// Reads a whole recommendation stream.
    pub async fn stream(&self, frame: u64, query: &str) -> (u16, Vec<(String, Value)>) {
        let r = self.client.get(self.url(&format!("/frames/{frame}/recommendations{query}"))).send().await.unwrap();
        let status = r.status().as_u16();
        let text = r.text().await.unwrap();
        (status, if status == 200 { parse_sse(&text) } else { vec![("body".into(), serde_json::from_str(&text).unwrap())] })
    }
}

/// Splits an SSE body into (event name, JSON data) pairs, skipping comments.
pub fn parse_sse(text: &str) -> Vec<(String, Value)> {
    text.split("\n\n")
        .filter_map(|block| {
            let mut event = None;
            let mut data = String::new();
            for line in block.lines() {
                if let Some(e) = line.strip_prefix("event:") {
                    event = Some(e.trim().to_string());
                } else if let Some(d) = line.strip_prefix("data:") {
                    data.push_str(d.strip_prefix(' ').unwrap_or(d));
                }
            }
            Some((event?, serde_json::from_str(&data).ok()?))
        })
        .collect()
}

/// Happy-planet-style table: five countries per region.
pub fn hpi_csv() -> String {
    let regions = ["Europe", "Americas", "Asia Pacific", "Africa", "Middle East"];
    let mut out = String::from("Country,Region,AvrgLifeExpectancy,Inequality,Wellbeing,Footprint,HappyPlanetIndex\n");
    for i in 0..60 {
        let region = regions[i % regions.len()];
        let life = 50.0 + (i as f64 * 7.3) % 33.0;
        let ineq = 0.45 - (life - 50.0) / 100.0 + ((i * 13) % 7) as f64 / 100.0;
        let well = 3.0 + (life - 50.0) / 8.0 + ((i * 5) % 3) as f64 / 10.0;
        let foot = 1.0 + ((i * 17) % 43) as f64 / 5.0;
        let hpi = 20.0 + well * 4.0 - foot;
        out.push_str(&format!("C{i:02},{region},{life:.2},{ineq:.3},{well:.2},{foot:.2},{hpi:.2}\n"));
    }
    out
}
