use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Parse,
    Domain,
    NotConverged,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Parse => 2,
            Kind::Domain => 3,
            Kind::NotConverged => 4,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Parse => "parse",
            Kind::Domain => "domain",
            Kind::NotConverged => "not_converged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub kind: Kind,
    pub path: Option<String>,
    pub message: String,
}

impl CliError {
    pub fn parse(path: Option<String>, message: String) -> Self {
        Self { kind: Kind::Parse, path, message }
    }

    pub fn domain(context: &str, e: entgame::Error) -> Self {
        let kind = match e {
            entgame::Error::NotConverged { .. }
            | entgame::Error::ToleranceNotReached(_)
            | entgame::Error::NonFiniteIterate(_) => Kind::NotConverged,
            _ => Kind::Domain,
        };
        Self { kind, path: None, message: format!("{context}: {e}") }
    }

    pub fn to_json(&self) -> Value {
        json!({ "error": { "kind": self.kind.name(), "path": self.path, "message": self.message } })
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{}: {}", p, self.message),
            None => f.write_str(&self.message),
        }
    }
}
