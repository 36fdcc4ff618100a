use core::fmt;
use core::str::FromStr;

/// Aggregation functions available to axis clauses and group-aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Sum,
    Count,
    Min,
    Max,
    /// Population variance (divides by n).
    Variance,
    None,
}

impl Aggregation {
    pub const ALL: [Aggregation; 7] = [
        Aggregation::Mean,
        Aggregation::Sum,
        Aggregation::Count,
        Aggregation::Min,
        Aggregation::Max,
        Aggregation::Variance,
        Aggregation::None,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::Sum => "sum",
            Aggregation::Count => "count",
            Aggregation::Min => "min",
            Aggregation::Max => "max",
            Aggregation::Variance => "variance",
            Aggregation::None => "none",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "mean" | "avg" | "average" => Aggregation::Mean,
            "sum" => Aggregation::Sum,
            "count" => Aggregation::Count,
            "min" => Aggregation::Min,
            "max" => Aggregation::Max,
            "variance" | "var" => Aggregation::Variance,
            "none" => Aggregation::None,
            _ => return Err(()),
        })
    }
}

/// Running state for one group. Values are folded in arrival order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accumulator {
    pub count: u64,
    pub sum: f64,
    mean: f64,
    m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self { count: 0, sum: 0.0, mean: 0.0, m2: 0.0, min: f64::INFINITY, max: f64::NEG_INFINITY }
    }
}

impl Accumulator {
    #[inline]
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
        if v < self.min {
            self.min = v;
        }
        if v > self.max {
            self.max = v;
        }
    }

    /// `None` when the aggregate is undefined (no values).
    pub fn finish(&self, agg: Aggregation) -> Option<f64> {
        if agg == Aggregation::Count {
            return Some(self.count as f64);
        }
        if self.count == 0 {
            return None;
        }
        Some(match agg {
            Aggregation::Mean => self.sum / self.count as f64,
            // unaggregated measures render stacked, which sums
            Aggregation::Sum | Aggregation::None => self.sum,
            Aggregation::Min => self.min,
            Aggregation::Max => self.max,
            Aggregation::Variance => self.m2 / self.count as f64,
            Aggregation::Count => unreachable!(),
        })
    }
}
