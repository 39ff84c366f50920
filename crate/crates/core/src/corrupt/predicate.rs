use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::CorruptError;
use crate::tabular::{Cell, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    fn holds(self, ord: Ordering) -> bool {
        match self {
            Comparator::Eq => ord == Ordering::Equal,
            Comparator::Ne => ord != Ordering::Equal,
            Comparator::Lt => ord == Ordering::Less,
            Comparator::Le => ord != Ordering::Greater,
            Comparator::Gt => ord == Ordering::Greater,
            Comparator::Ge => ord != Ordering::Less,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl Literal {
    fn as_text(&self) -> String {
        match self {
            Literal::Number(v) => format!("{v}"),
            Literal::Text(s) => s.clone(),
        }
    }

    fn as_number(&self) -> Option<f64> {
        match self {
            Literal::Number(v) => Some(*v),
            Literal::Text(s) => s.trim().parse().ok(),
        }
    }
}

/// `column <op> value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub column: String,
    pub op: Comparator,
    pub value: Literal,
}

/// Conjunction of clauses. Null cells never satisfy a clause.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RowPredicate(pub Vec<Clause>);

impl RowPredicate {
    pub fn clause(column: impl Into<String>, op: Comparator, value: Literal) -> Self {
        RowPredicate(vec![Clause {
            column: column.into(),
            op,
            value,
        }])
    }

    pub fn and(mut self, column: impl Into<String>, op: Comparator, value: Literal) -> Self {
        self.0.push(Clause {
            column: column.into(),
            op,
            value,
        });
        self
    }

    /// Row positions of `d` that satisfy every clause.
    pub fn select(&self, d: &Dataset) -> Result<Vec<usize>, CorruptError> {
        let resolved = self
            .0
            .iter()
            .map(|c| {
                d.column_index(&c.column)
                    .map(|idx| (idx, c))
                    .ok_or_else(|| CorruptError::FeatureNotFound(c.column.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((0..d.n_rows())
            .filter(|&row| resolved.iter().all(|&(col, c)| matches(d, row, col, c)))
            .collect())
    }
}

fn matches(d: &Dataset, row: usize, col: usize, clause: &Clause) -> bool {
    match d.cell(row, col) {
        Cell::Null => false,
        Cell::Number(v) => clause
            .value
            .as_number()
            .and_then(|lit| v.partial_cmp(&lit))
            .is_some_and(|ord| clause.op.holds(ord)),
        Cell::Category(c) => {
            let label = &d.column_schema(col).categories()[c as usize];
            clause.op.holds(label.as_str().cmp(clause.value.as_text().as_str()))
        }
    }
}
