use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use super::{ChatRequest, ChatResponse, Transport, TransportError};

/// Decorator that counts every send reaching the wrapped transport, so
/// tests can assert that gated requests never produce transport activity.
pub struct RecordingTransport<T> {
    inner: T,
    sends: Arc<AtomicUsize>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T) -> (Self, Arc<AtomicUsize>) {
        let sends = Arc::new(AtomicUsize::new(0));
        (Self { inner, sends: Arc::clone(&sends) }, sends)
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, TransportError> {
        self.sends.fetch_add(1, Ordering::SeqCst);
        self.inner.send(request)
    }
}
