use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Runtime value of the control language: a number or a (possibly nested) list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound = "S: Scalar")]
pub enum Value<S> {
    Number(S),
    List(Vec<Value<S>>),
}

impl<S: Scalar> Value<S> {
    pub fn as_number(&self) -> Option<S> {
        match self {
            Value::Number(n) => Some(*n),
            Value::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value<S>]> {
        match self {
            Value::List(items) => Some(items),
            Value::Number(_) => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::List(_) => "list",
        }
    }

    pub fn numbers(items: impl IntoIterator<Item = S>) -> Self {
        Value::List(items.into_iter().map(Value::Number).collect())
    }
}

impl<S: Scalar> fmt::Display for Value<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => write!(f, "{n}"),
            Value::List(items) => {
                f.write_str("[")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("]")
            }
        }
    }
}
