//! Route prediction from trip history.
//!
//! A trip is a sequence of road segments. Past trips are counted per exact
//! segment sequence; conditioning on the segment currently being ridden
//! yields a probability for every historical route through it, the most
//! likely route, and per-segment traversal probabilities that feed the
//! energy optimizer.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Opaque identifier of one road segment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SegmentId(String);

impl SegmentId {
    pub fn new(id: impl Into<String>) -> Self {
        SegmentId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SegmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SegmentId {
    fn from(s: &str) -> Self {
        SegmentId::new(s)
    }
}

/// An ordered, non-empty sequence of road segments.
///
/// Two trips count as the same route only when their segment sequences are
/// identical. Immediate self-repetition of a segment is rejected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Route {
    segments: Vec<SegmentId>,
}

impl Route {
    pub fn new(segments: Vec<SegmentId>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyRoute);
        }
        for pair in segments.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::RepeatedSegment(pair[0].to_string()));
            }
        }
        Ok(Route { segments })
    }

    /// Convenience constructor from string ids; panics on an invalid route,
    /// so only suitable for literals.
    pub fn from_ids<'a>(ids: impl IntoIterator<Item = &'a str>) -> Self {
        Route::new(ids.into_iter().map(SegmentId::from).collect())
            .expect("invalid route literal")
    }

    pub fn segments(&self) -> &[SegmentId] {
        &self.segments
    }

    pub fn contains(&self, segment: &SegmentId) -> bool {
        self.segments.contains(segment)
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for s in &self.segments {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
            first = false;
        }
        Ok(())
    }
}

/// Multiset of past trips, keyed by exact segment sequence.
#[derive(Debug, Clone, Default)]
pub struct TripHistory {
    counts: BTreeMap<Route, u64>,
}

/// Probabilities over the historical routes that contain a conditioning
/// segment. Entries sum to one.
#[derive(Debug, Clone)]
pub struct RouteDistribution {
    conditioning: SegmentId,
    entries: BTreeMap<Route, f64>,
}

impl TripHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one completed trip, incrementing its route count.
    pub fn record_trip(&mut self, trip: Route) {
        *self.counts.entry(trip).or_insert(0) += 1;
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn trip_count(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn count(&self, route: &Route) -> u64 {
        self.counts.get(route).copied().unwrap_or(0)
    }

    pub fn routes(&self) -> impl Iterator<Item = (&Route, u64)> {
        self.counts.iter().map(|(r, c)| (r, *c))
    }

    /// Probability of each historical route that contains `current`,
    /// proportional to how often it was ridden.
    pub fn route_distribution(&self, current: &SegmentId) -> Result<RouteDistribution> {
        let matching: Vec<(&Route, u64)> = self
            .counts
            .iter()
            .filter(|(route, _)| route.contains(current))
            .map(|(r, c)| (r, *c))
            .collect();
        let total: u64 = matching.iter().map(|(_, c)| c).sum();
        if total == 0 {
            return Err(Error::NoHistory(current.to_string()));
        }
        let entries = matching
            .into_iter()
            .map(|(route, count)| (route.clone(), count as f64 / total as f64))
            .collect();
        Ok(RouteDistribution {
            conditioning: current.clone(),
            entries,
        })
    }

    /// The most likely route through `current`; ties break toward the
    /// lexicographically smallest segment sequence.
    pub fn predict_route(&self, current: &SegmentId) -> Result<Route> {
        let dist = self.route_distribution(current)?;
        Ok(dist.most_likely().clone())
    }

    /// Probability that `target` is traversed in the remainder of the trip,
    /// given the bike is on `current`: the summed probability of all
    /// conditioning routes that contain `target`.
    pub fn segment_probability(&self, current: &SegmentId, target: &SegmentId) -> Result<f64> {
        let dist = self.route_distribution(current)?;
        Ok(dist.segment_probability(target))
    }

    /// Parse a line-oriented trip list: one trip per line, comma-separated
    /// segment ids, blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut history = TripHistory::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let segments: Vec<SegmentId> = line
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(SegmentId::from)
                .collect();
            let route = Route::new(segments).map_err(|e| Error::ScenarioParse {
                line: idx + 1,
                message: e.to_string(),
            })?;
            history.record_trip(route);
        }
        Ok(history)
    }
}

impl RouteDistribution {
    pub fn conditioning_segment(&self) -> &SegmentId {
        &self.conditioning
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Route, f64)> {
        self.entries.iter().map(|(r, p)| (r, *p))
    }

    pub fn probability(&self, route: &Route) -> f64 {
        self.entries.get(route).copied().unwrap_or(0.0)
    }

    pub fn most_likely(&self) -> &Route {
        // BTreeMap iterates in lexicographic route order, so keeping the
        // first strict maximum implements the declared tie-break.
        let mut best: Option<(&Route, f64)> = None;
        for (route, p) in &self.entries {
            match best {
                Some((_, bp)) if *p <= bp => {}
                _ => best = Some((route, *p)),
            }
        }
        best.expect("distribution is never empty").0
    }

    pub fn segment_probability(&self, target: &SegmentId) -> f64 {
        self.entries
            .iter()
            .filter(|(route, _)| route.contains(target))
            .map(|(_, p)| p)
            .sum()
    }

    /// Every segment mentioned by any route in the distribution.
    pub fn segments(&self) -> Vec<SegmentId> {
        let mut out: Vec<SegmentId> = self
            .entries
            .keys()
            .flat_map(|r| r.segments().iter().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }
}
