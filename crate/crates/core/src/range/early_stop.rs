use std::fmt;
use std::str::FromStr;

use crate::graph::{StopContext, StopPredicate};
use crate::{Error, Result};

/// Quantity compared against the early-stopping threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StopMetric {
    /// Distance of the point about to be visited.
    DVisited,
    /// Distance of the closest beam element.
    DTop1,
    /// Distance of the tenth closest beam element (+inf with fewer than ten).
    DTop10,
    /// `DTop10` divided by the distance of the first start point.
    DTop10OverDStart,
    /// Closest visited point that has since dropped out of the beam.
    VisitedOutsideBeam,
    Never,
}

impl StopMetric {
    pub const ALL: [StopMetric; 6] = [
        StopMetric::DVisited,
        StopMetric::DTop1,
        StopMetric::DTop10,
        StopMetric::DTop10OverDStart,
        StopMetric::VisitedOutsideBeam,
        StopMetric::Never,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StopMetric::DVisited => "d_visited",
            StopMetric::DTop1 => "d_top1",
            StopMetric::DTop10 => "d_top10",
            StopMetric::DTop10OverDStart => "d_top10_over_d_start",
            StopMetric::VisitedOutsideBeam => "visited_outside_beam",
            StopMetric::Never => "never",
        }
    }

    /// Value of the metric in the given search state, or `None` when it is
    /// undefined there.
    pub fn evaluate(self, ctx: &StopContext<'_>) -> Option<f32> {
        let top10 = || ctx.beam.get(9).map_or(f32::INFINITY, |n| n.distance);
        match self {
            StopMetric::DVisited => Some(ctx.candidate.distance),
            StopMetric::DTop1 => ctx.beam.first().map(|n| n.distance),
            StopMetric::DTop10 => Some(top10()),
            StopMetric::DTop10OverDStart => Some(top10() / ctx.start_distance),
            StopMetric::VisitedOutsideBeam => ctx
                .visited
                .iter()
                .filter(|v| !ctx.beam.iter().any(|b| b.id == v.id))
                .map(|v| v.distance)
                .min_by(f32::total_cmp),
            StopMetric::Never => None,
        }
    }
}

impl fmt::Display for StopMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StopMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StopMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown early-stop metric '{s}'")))
    }
}

/// Cutoffs for abandoning a query that looks like it has no results.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EarlyStopConfig {
    pub enabled: bool,
    /// Minimum completed visits before the predicate may fire.
    pub visit_limit: usize,
    /// Early-stopping radius; a unitless ratio for `DTop10OverDStart`.
    pub threshold: f32,
    pub metric: StopMetric,
}

impl Default for EarlyStopConfig {
    fn default() -> Self {
        EarlyStopConfig {
            enabled: false,
            visit_limit: 20,
            threshold: f32::INFINITY,
            metric: StopMetric::DVisited,
        }
    }
}

impl EarlyStopConfig {
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn d_visited(visit_limit: usize, threshold: f32) -> Self {
        EarlyStopConfig {
            enabled: true,
            visit_limit,
            threshold,
            metric: StopMetric::DVisited,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.threshold.is_nan() {
            return Err(Error::InvalidParams("early-stop threshold is NaN".into()));
        }
        if self.enabled
            && self.metric == StopMetric::DTop10OverDStart
            && !(self.threshold > 0.0)
        {
            return Err(Error::InvalidParams(
                "ratio early-stop threshold must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The zero-result stopping rule. Fires only when all three hold:
///
/// 1. the closest beam element lies outside the query radius,
/// 2. at least `visit_limit` points have been visited,
/// 3. the selected metric exceeds `threshold`.
pub fn early_stop_example(ctx: &StopContext<'_>, cfg: &EarlyStopConfig) -> bool {
    if !cfg.enabled || cfg.metric == StopMetric::Never {
        return false;
    }
    let nothing_in_range = ctx.beam.first().is_some_and(|n| n.distance > ctx.radius);
    if !nothing_in_range || ctx.visits < cfg.visit_limit {
        return false;
    }
    cfg.metric
        .evaluate(ctx)
        .is_some_and(|value| value > cfg.threshold)
}

impl StopPredicate for EarlyStopConfig {
    fn should_stop(&self, ctx: &StopContext<'_>) -> bool {
        early_stop_example(ctx, self)
    }
}
