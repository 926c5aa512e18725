//! Read-only HTTP access to a directory of exports.
//!
//! ```text
//! cargo run --example end_to_end
//! cargo run --example serve                     # query in-process and exit
//! cargo run --example serve -- DIR 127.0.0.1:8080   # listen until stopped
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::Request;
use tower::ServiceExt;

use actionlens::service::{router, serve, ArtifactIndex};

#[tokio::main(flavor = "current_thread")]
async fn main() -> actionlens::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/actionlens-demo"));
    if let Some(addr) = args.next() {
        let addr = addr.parse().expect("address like 127.0.0.1:8080");
        println!("serving {} on http://{addr}/v1/windows", dir.display());
        return serve(&dir, addr).await;
    }

    let app = router(Arc::new(ArtifactIndex::load(&dir)?));
    for uri in [
        "/v1/windows",
        "/v1/series?from=2014-11-25T01:00:00Z&to=2014-11-25T04:00:00Z&mode=collective_force",
        "/v1/clusters?window=2014-11-25T02:00:00Z",
        "/v1/shift?window=2014-11-25T02:00:00Z&mode=collective_force",
        "/v1/counties?from=2014-11-24T18:00:00Z&to=2014-11-25T18:00:00Z",
        "/v1/shift?window=yesterday&mode=all",
    ] {
        let res = app.clone().oneshot(Request::get(uri).body(Body::empty()).unwrap()).await.unwrap();
        let status = res.status();
        let body = to_bytes(res.into_body(), usize::MAX).await.unwrap();
        let text = String::from_utf8_lossy(&body);
        let shown: String = text.chars().take(160).collect();
        println!("GET {uri}\n  {status} {shown}{}\n", if text.len() > 160 { " ..." } else { "" });
    }
    Ok(())
}
