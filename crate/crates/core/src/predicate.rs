use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::datetime;
use crate::frame::{Column, ColumnData, StorageType};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum FilterOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "!=")]
    Ne,
}

impl FilterOp {
    pub fn as_str(self) -> &'static str {
        match self {
            FilterOp::Eq => "=",
            FilterOp::Gt => ">",
            FilterOp::Lt => "<",
            FilterOp::Le => "<=",
            FilterOp::Ge => ">=",
            FilterOp::Ne => "!=",
        }
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            FilterOp::Eq => ord == Ordering::Equal,
            FilterOp::Ne => ord != Ordering::Equal,
            FilterOp::Gt => ord == Ordering::Greater,
            FilterOp::Lt => ord == Ordering::Less,
            FilterOp::Le => ord != Ordering::Greater,
            FilterOp::Ge => ord != Ordering::Less,
        }
    }
}

impl fmt::Display for FilterOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FilterOp {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "=" | "==" => FilterOp::Eq,
            ">" => FilterOp::Gt,
            "<" => FilterOp::Lt,
            "<=" | "≤" => FilterOp::Le,
            ">=" | "≥" => FilterOp::Ge,
            "!=" | "≠" => FilterOp::Ne,
            _ => return Err(()),
        })
    }
}

/// A single-column comparison `column op value`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Predicate {
    pub column: String,
    pub op: FilterOp,
    pub value: Value,
}

impl Predicate {
    pub fn new(column: impl Into<String>, op: FilterOp, value: Value) -> Self {
        Self { column: column.into(), op, value }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.column, self.op, self.value)
    }
}

/// Converts `value` to the representation used by `data`, if possible.
pub fn coerce(value: &Value, data: &ColumnData) -> Option<Value> {
    coerce_to(value, data.storage_type())
}

/// Converts `value` to the cell representation of `storage`, if possible.
pub fn coerce_to(value: &Value, storage: StorageType) -> Option<Value> {
    use StorageType as ColumnData;
    match (storage, value) {
        (ColumnData::Integer, Value::Int(_)) => Some(value.clone()),
        (ColumnData::Integer | ColumnData::Float, Value::Float(f)) => Some(Value::Float(*f)),
        (ColumnData::Float, Value::Int(i)) => Some(Value::Float(*i as f64)),
        (ColumnData::Integer, Value::Str(s)) => {
            let s = s.trim();
            s.parse::<i64>().map(Value::Int).ok().or_else(|| s.parse::<f64>().ok().map(Value::Float))
        }
        (ColumnData::Float, Value::Str(s)) => s.trim().parse::<f64>().ok().map(Value::Float),
        (ColumnData::Boolean, Value::Bool(_)) => Some(value.clone()),
        (ColumnData::Boolean, Value::Str(s)) => match s.trim().to_ascii_lowercase().as_str() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        (ColumnData::Datetime, Value::Datetime(_)) => Some(value.clone()),
        (ColumnData::Datetime, Value::Str(s)) => datetime::parse_iso8601(s).map(Value::Datetime),
        (ColumnData::String, Value::Str(_)) => Some(value.clone()),
        (ColumnData::String, other) => Some(Value::Str(other.to_label())),
        _ => None,
    }
}

/// Row test for a predicate bound to one column. Null cells never match.
pub struct BoundPredicate<'a> {
    column: &'a Column,
    op: FilterOp,
    target: Option<Value>,
    code: Option<Option<u32>>,
}

impl<'a> BoundPredicate<'a> {
    pub fn bind(column: &'a Column, op: FilterOp, value: &Value) -> Self {
        let target = coerce(value, &column.data);
        let code = match (&column.data, &target) {
            (ColumnData::String(s), Some(Value::Str(t))) if matches!(op, FilterOp::Eq | FilterOp::Ne) => {
                Some(s.code_of(t))
            }
            _ => None,
        };
        Self { column, op, target, code }
    }

    #[inline]
    pub fn matches(&self, row: usize) -> bool {
        if let (Some(code), ColumnData::String(s)) = (self.code, &self.column.data) {
            return match s.codes[row] {
                None => false,
                Some(c) => (Some(c) == code) == (self.op == FilterOp::Eq),
            };
        }
        let Some(cell) = self.column.data.value(row) else {
            return false;
        };
        match &self.target {
            Some(t) => self.op.holds(compare_cell(&cell, t)),
            None => self.op == FilterOp::Ne,
        }
    }
}

fn compare_cell(cell: &Value, target: &Value) -> Ordering {
    match (cell, target) {
        (Value::Int(a), Value::Float(b)) => (*a as f64).total_cmp(b),
        (Value::Float(a), Value::Int(b)) => a.total_cmp(&(*b as f64)),
        _ => cell.cmp(target),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Column;
    use alloc::vec;

    #[test]
    fn int_column_against_float_and_text() {
        let col = Column::new("a", ColumnData::Integer(vec![Some(1), Some(2), None, Some(3)]));
        let p = BoundPredicate::bind(&col, FilterOp::Gt, &Value::Float(1.5));
        let hits: alloc::vec::Vec<_> = (0..4).filter(|&r| p.matches(r)).collect();
        assert_eq!(hits, vec![1, 3]);
        let p = BoundPredicate::bind(&col, FilterOp::Eq, &Value::Str("2".into()));
        assert!(p.matches(1) && !p.matches(0) && !p.matches(2));
    }

    #[test]
    fn string_equality_by_code() {
        let col = Column::from_strings("d", [Some("x"), Some("y"), None, Some("x")]);
        let eq = BoundPredicate::bind(&col, FilterOp::Eq, &Value::from("x"));
        let ne = BoundPredicate::bind(&col, FilterOp::Ne, &Value::from("x"));
        assert_eq!((0..4).filter(|&r| eq.matches(r)).count(), 2);
        assert_eq!((0..4).filter(|&r| ne.matches(r)).count(), 1);
        let missing = BoundPredicate::bind(&col, FilterOp::Eq, &Value::from("zz"));
        assert_eq!((0..4).filter(|&r| missing.matches(r)).count(), 0);
    }

    #[test]
    fn unparseable_target_only_matches_not_equal() {
        let col = Column::new("a", ColumnData::Float(vec![Some(1.0), None]));
        let p = BoundPredicate::bind(&col, FilterOp::Ne, &Value::from("abc"));
        assert!(p.matches(0) && !p.matches(1));
        let p = BoundPredicate::bind(&col, FilterOp::Lt, &Value::from("abc"));
        assert!(!p.matches(0));
    }
}
