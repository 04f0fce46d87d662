use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

type EvalFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Black-box objective with an evaluation counter.
///
/// The counter is only ever incremented, once per call to [`Objective::eval`].
pub struct Objective {
    name: String,
    dim: usize,
    func: EvalFn,
    count: AtomicU64,
}

impl Objective {
    pub fn new<F>(name: impl Into<String>, dim: usize, func: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        assert!(dim >= 1, "objective dimension must be positive");
        Self { name: name.into(), dim, func: Box::new(func), count: AtomicU64::new(0) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        self.count.fetch_add(1, Ordering::Relaxed);
        (self.func)(x)
    }

    pub fn eval_count(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("eval_count", &self.eval_count())
            .finish()
    }
}
