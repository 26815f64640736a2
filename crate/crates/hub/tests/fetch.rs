use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use subword_stats_hub::{sha256_hex, HubError, VocabCache};

const VOCAB: &str = "[PAD]\n[UNK]\n[CLS]\n[SEP]\n[MASK]\nhello\n##s\n";

/// Minimal HTTP/1.1 server: `/good/model/resolve/main/vocab.txt` serves
/// VOCAB, `/short/...` lies about its length, anything else is a 404.
struct Server {
    base_url: String,
    hits: Arc<AtomicUsize>,
}

fn respond(mut stream: TcpStream, hits: &AtomicUsize) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() {
        return;
    }
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header).unwrap_or(0) == 0 || header == "\r\n" {
            break;
        }
    }
    hits.fetch_add(1, Ordering::SeqCst);
    let path = request_line.split_whitespace().nth(1).unwrap_or("");
    let response = if path == "/org/good/resolve/main/vocab.txt" {
        format!(
            "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            VOCAB.len(),
            VOCAB
        )
    } else if path.starts_with("/org/short/") {
        format!(
            "HTTP/1.1 200 OK\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            VOCAB.len() + 50,
            VOCAB
        )
    } else {
        "HTTP/1.1 404 Not Found\r\nContent-Length: 9\r\nConnection: close\r\n\r\nnot found"
            .to_owned()
    };
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}

impl Server {
    fn start() -> Server {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let base_url = format!("http://{}", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let counter = counter.clone();
                thread::spawn(move || respond(stream, &counter));
            }
        });
        Server { base_url, hits }
    }

    fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

fn snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_owned()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != ".lock" {
                files.push((
                    path.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&path).unwrap(),
                ));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn second_fetch_is_a_cache_hit() {
    let server = Server::start();
    let dir = tempfile::tempdir().unwrap();
    let cache = VocabCache::new(dir.path()).with_base_url(&server.base_url);

    let first = cache.fetch("org/good").unwrap();
    assert_eq!(std::fs::read_to_string(&first).unwrap(), VOCAB);
    assert_eq!(server.hits(), 1);
    let before = snapshot(dir.path());

    let second = cache.fetch("org/good").unwrap();
    assert_eq!(first, second);
    assert_eq!(server.hits(), 1);
    assert_eq!(snapshot(dir.path()), before);

    let entry = cache.entry("org/good").unwrap().unwrap();
    assert_eq!(entry.content_digest, sha256_hex(VOCAB.as_bytes()));
    assert!(entry.url.ends_with("/org/good/resolve/main/vocab.txt"));
}

#[test]
fn missing_model_leaves_cache_untouched() {
    let server = Server::start();
    let dir = tempfile::tempdir().unwrap();
    let cache = VocabCache::new(dir.path()).with_base_url(&server.base_url);
    let err = cache.fetch("org/bogus-model").unwrap_err();
    assert!(matches!(err, HubError::ModelNotFound { .. }), "{err}");
    assert!(err.is_network());
    assert!(snapshot(dir.path()).is_empty());
}

#[test]
fn offline_cold_cache_is_unavailable() {
    // bind and drop to get a port nobody listens on
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let dir = tempfile::tempdir().unwrap();
    let cache = VocabCache::new(dir.path()).with_base_url(format!("http://127.0.0.1:{port}"));
    let err = cache.fetch("org/good").unwrap_err();
    assert!(matches!(err, HubError::Unavailable { .. }), "{err}");
}

#[test]
fn offline_warm_cache_still_works() {
    let server = Server::start();
    let dir = tempfile::tempdir().unwrap();
    let path = VocabCache::new(dir.path())
        .with_base_url(&server.base_url)
        .fetch("org/good")
        .unwrap();
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let offline = VocabCache::new(dir.path()).with_base_url(format!("http://127.0.0.1:{port}"));
    assert_eq!(offline.fetch("org/good").unwrap(), path);
}

#[test]
fn corrupted_cache_file_is_refetched() {
    let server = Server::start();
    let dir = tempfile::tempdir().unwrap();
    let cache = VocabCache::new(dir.path()).with_base_url(&server.base_url);
    let path = cache.fetch("org/good").unwrap();
    std::fs::write(&path, "tampered\n").unwrap();
    assert_eq!(cache.cached("org/good").unwrap(), None);
    assert_eq!(cache.fetch("org/good").unwrap(), path);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), VOCAB);
    assert_eq!(server.hits(), 2);
}

#[test]
fn short_body_is_rejected_without_publishing() {
    let server = Server::start();
    let dir = tempfile::tempdir().unwrap();
    let cache = VocabCache::new(dir.path()).with_base_url(&server.base_url);
    let err = cache.fetch("org/short").unwrap_err();
    assert!(err.is_network(), "{err}");
    assert!(cache.entry("org/short").unwrap().is_none());
    assert!(!dir.path().join("vocabs/org--short/vocab.txt").exists());
}

#[test]
fn concurrent_fetches_agree() {
    let server = Server::start();
    let dir = tempfile::tempdir().unwrap();
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let cache = VocabCache::new(dir.path()).with_base_url(&server.base_url);
            thread::spawn(move || cache.fetch("org/good").unwrap())
        })
        .collect();
    let paths: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    assert!(paths.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(std::fs::read_to_string(&paths[0]).unwrap(), VOCAB);
    let cache = VocabCache::new(dir.path());
    assert_eq!(cache.cached("org/good").unwrap().as_ref(), Some(&paths[0]));
    // no stray temp files next to the vocabulary
    let files = snapshot(dir.path());
    assert_eq!(
        files.len(),
        2,
        "{:?}",
        files.iter().map(|f| &f.0).collect::<Vec<_>>()
    );
}

#[test]
fn invalid_model_id_never_hits_the_network() {
    let server = Server::start();
    let dir = tempfile::tempdir().unwrap();
    let cache = VocabCache::new(dir.path()).with_base_url(&server.base_url);
    assert!(matches!(
        cache.fetch("../x"),
        Err(HubError::InvalidModelId(_))
    ));
    assert_eq!(server.hits(), 0);
}
