//! Text generation port used by the excuse agent.

use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("text generation timed out after {0:?}")]
    Timeout(Duration),
    #[error("text generation failed: {0}")]
    Failed(String),
}

/// Turns a prompt into text. Implementations must return or fail within
/// their configured timeout.
pub trait TextGenerator: Send + Sync {
    fn generate(&self, prompt: &str) -> Result<String, GeneratorError>;
}

impl<F> TextGenerator for F
where
    F: Fn(&str) -> Result<String, GeneratorError> + Send + Sync,
{
    fn generate(&self, prompt: &str) -> Result<String, GeneratorError> {
        self(prompt)
    }
}

/// Posts the prompt as the plain-text request body and returns the response
/// body as the generated text.
#[derive(Debug, Clone)]
pub struct HttpGenerator {
    endpoint: String,
    token: Option<String>,
    timeout: Duration,
    agent: ureq::Agent,
}

impl HttpGenerator {
    pub fn new(endpoint: impl Into<String>, token: Option<String>, timeout: Duration) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        HttpGenerator {
            endpoint: endpoint.into(),
            token,
            timeout,
            agent,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl TextGenerator for HttpGenerator {
    fn generate(&self, prompt: &str) -> Result<String, GeneratorError> {
        let mut req = self
            .agent
            .post(&self.endpoint)
            .set("Content-Type", "text/plain; charset=utf-8");
        if let Some(token) = &self.token {
            req = req.set("Authorization", &format!("Bearer {token}"));
        }
        let timed_out = |e: &std::io::Error| {
            matches!(e.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock)
        };
        match req.send_string(prompt) {
            Ok(resp) => resp.into_string().map_err(|e| {
                if timed_out(&e) {
                    GeneratorError::Timeout(self.timeout)
                } else {
                    GeneratorError::Failed(format!("reading response: {e}"))
                }
            }),
            Err(ureq::Error::Status(code, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                Err(GeneratorError::Failed(format!("status {code}: {}", body.trim())))
            }
            Err(ureq::Error::Transport(t)) => {
                let is_timeout = std::error::Error::source(&t)
                    .and_then(|s| s.downcast_ref::<std::io::Error>())
                    .is_some_and(timed_out);
                if is_timeout {
                    Err(GeneratorError::Timeout(self.timeout))
                } else {
                    Err(GeneratorError::Failed(t.to_string()))
                }
            }
        }
    }
}
