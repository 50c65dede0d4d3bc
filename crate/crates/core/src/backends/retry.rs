use std::time::Duration;

const MAX_BACKOFF: Duration = Duration::from_secs(30);

/// Exponential backoff: `base`, `2·base`, `4·base`, ... capped at 30 s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base: Duration,
}

/// Outcome of one attempt as seen by the retry loop.
pub(crate) enum Attempt<T, E> {
    Done(T),
    Transient(E),
    Fatal(E),
}

impl RetryPolicy {
    pub fn new(max_retries: u32, base: Duration) -> Self {
        Self { max_retries, base }
    }

    pub fn delay(&self, retry: u32) -> Duration {
        let factor = 1u32.checked_shl(retry).unwrap_or(u32::MAX);
        self.base.saturating_mul(factor).min(MAX_BACKOFF)
    }

    /// Runs `op` up to `max_retries + 1` times, sleeping between transient
    /// failures.
    pub(crate) fn run<T, E>(&self, mut op: impl FnMut(u32) -> Attempt<T, E>) -> Result<T, E> {
        let mut attempt = 0;
        loop {
            match op(attempt) {
                Attempt::Done(v) => return Ok(v),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Transient(e) if attempt >= self.max_retries => return Err(e),
                Attempt::Transient(e) => {
                    let d = self.delay(attempt);
                    log::debug!("transient failure on attempt {}, retrying in {d:?}", attempt + 1);
                    drop(e);
                    std::thread::sleep(d);
                    attempt += 1;
                }
            }
        }
    }
}
