//! Client-side token-bucket rate limiter.

use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Token bucket refilled continuously at the configured requests-per-minute
/// rate. `acquire` blocks the calling thread until a token is available, so
/// concurrent provider calls are serialized to the configured rate.
pub struct RateLimiter {
    state: Mutex<BucketState>,
    capacity: f64,
    per_sec: f64,
}

struct BucketState {
    tokens: f64,
    last_refill: Instant,
}

impl RateLimiter {
    pub fn per_minute(requests_per_minute: f64) -> Self {
        let capacity = requests_per_minute.max(1.0);
        RateLimiter {
            state: Mutex::new(BucketState {
                tokens: capacity,
                last_refill: Instant::now(),
            }),
            capacity,
            per_sec: requests_per_minute / 60.0,
        }
    }

    /// Block until one request token is available, then consume it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().expect("limiter lock");
                let now = Instant::now();
                let elapsed = now.duration_since(state.last_refill).as_secs_f64();
                state.tokens = (state.tokens + elapsed * self.per_sec).min(self.capacity);
                state.last_refill = now;
                if state.tokens >= 1.0 {
                    state.tokens -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - state.tokens) / self.per_sec)
            };
            std::thread::sleep(wait);
        }
    }
}
