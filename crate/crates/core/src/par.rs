//! Data-parallel helpers with a sequential fallback.
//!
//! All helpers return results in index order, so reductions done by the
//! caller over the returned vectors are independent of the thread count.

/// How an embarrassingly parallel loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon's global pool (or the pool installed by the caller). Behaves as
    /// `Sequential` when the crate is built without the `parallel` feature.
    #[default]
    Parallel,
}

impl Execution {
    pub fn map_range<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    pub fn map_slice<S, T, F>(self, items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    pub fn sort_f64(self, v: &mut [f64]) {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                v.par_sort_unstable_by(f64::total_cmp)
            }
            _ => v.sort_unstable_by(f64::total_cmp),
        }
    }
}

/// Neumaier-compensated sum, used wherever terms alternate in sign.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut acc = CompensatedSum::default();
    for x in it {
        acc.add(x);
    }
    acc.value()
}
