use serde::Serialize;

/// Outcome of one numerical check of a counting or estimation bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationRecord {
    pub check: String,
    pub parameters: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationRecord {
    pub fn new(
        check: impl Into<String>,
        parameters: impl Into<String>,
        measured: f64,
        bound: f64,
        pass: bool,
    ) -> Self {
        VerificationRecord {
            check: check.into(),
            parameters: parameters.into(),
            measured,
            bound,
            pass,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}
