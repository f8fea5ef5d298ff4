use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeErrorKind {
    NotASubtype,
    MissingField { label: String },
    UnboundVariable { name: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub message: String,
}

impl TypeError {
    pub(crate) fn unbound(name: &str) -> Self {
        Self {
            kind: TypeErrorKind::UnboundVariable {
                name: name.to_owned(),
            },
            message: format!("unbound variable `{name}`"),
        }
    }

    pub(crate) fn not_a_subtype(lhs: &str, rhs: &str) -> Self {
        Self {
            kind: TypeErrorKind::NotASubtype,
            message: format!("`{lhs}` is not a subtype of `{rhs}`"),
        }
    }

    /// `rows` are the two record types being compared, if known.
    pub(crate) fn missing_field(label: &str, rows: Option<(String, String)>) -> Self {
        let message = match rows {
            Some((have, want)) => {
                format!("missing field `{label}`: `{have}` is not a subtype of `{want}`")
            }
            None => format!("missing field `{label}`"),
        };
        Self {
            kind: TypeErrorKind::MissingField {
                label: label.to_owned(),
            },
            message,
        }
    }
}
