use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluations: u64,
    pub best_fitness: f64,
}

/// Best-so-far fitness sampled every `interval` evaluations.
///
/// The trace counts evaluations itself: every call to [`Trace::record`] is
/// one evaluation, in execution order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    interval: u64,
    evaluations: u64,
    best: f64,
    points: Vec<TracePoint>,
}

impl Trace {
    pub fn new(interval: u64) -> Self {
        Trace {
            interval: interval.max(1),
            evaluations: 0,
            best: f64::INFINITY,
            points: Vec::new(),
        }
    }

    /// Interval of `max(1, budget / 200)`, which bounds a trace to about 200 points.
    pub fn for_budget(budget: u64) -> Self {
        Trace::new((budget / 200).max(1))
    }

    pub fn interval(&self) -> u64 {
        self.interval
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn record(&mut self, fitness: f64) {
        self.evaluations += 1;
        if fitness < self.best {
            self.best = fitness;
        }
        if self.evaluations.is_multiple_of(self.interval) {
            self.push_current();
        }
    }

    /// Appends the final state if the last sample does not already cover it.
    pub fn finish(&mut self) {
        if self.evaluations > 0
            && self.points.last().map(|p| p.evaluations) != Some(self.evaluations)
        {
            self.push_current();
        }
    }

    fn push_current(&mut self) {
        self.points.push(TracePoint {
            evaluations: self.evaluations,
            best_fitness: self.best,
        });
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<TracePoint> {
        self.points
    }
}

/// Records into an optional trace.
pub(crate) fn record(trace: &mut Option<&mut Trace>, fitness: f64) {
    if let Some(t) = trace.as_deref_mut() {
        t.record(fitness);
    }
}
