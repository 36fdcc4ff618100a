use super::spec::{CompiledVisSpec, Mark};

/// Work units per row for each filter pass.
pub const FILTER_WEIGHT: f64 = 0.5;

/// Work units per source row for each mark.
pub fn mark_weight(mark: Mark) -> f64 {
    match mark {
        Mark::Scatter => 1.0,
        Mark::ColorScatter => 1.5,
        Mark::Bar | Mark::Line => 2.0,
        Mark::ColorBar | Mark::ColorLine => 3.0,
        Mark::Histogram => 2.0,
        Mark::Heatmap => 4.0,
        Mark::ColorHeatmap => 6.0,
        Mark::Map => 2.0,
    }
}

/// Predicted processing work for `spec` over `rows` source rows.
pub fn estimate_vis_cost(spec: &CompiledVisSpec, rows: usize) -> f64 {
    let n = rows as f64;
    n * mark_weight(spec.mark) + n * FILTER_WEIGHT * spec.filters.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metadata::SemanticType;
    use crate::vis::Encoding;

    fn spec(mark: Mark) -> CompiledVisSpec {
        CompiledVisSpec::new(mark, Encoding::field("a", SemanticType::Quantitative), Encoding::count(), None)
    }

    #[test]
    fn ordering_and_linearity() {
        let n = 1000;
        let c = |m| estimate_vis_cost(&spec(m), n);
        assert!(c(Mark::ColorHeatmap) > c(Mark::Heatmap) && c(Mark::Heatmap) > c(Mark::Histogram));
        assert_eq!(estimate_vis_cost(&spec(Mark::Bar), 0), 0.0);
        assert_eq!(estimate_vis_cost(&spec(Mark::Bar), 2 * n), 2.0 * c(Mark::Bar));
    }
}
