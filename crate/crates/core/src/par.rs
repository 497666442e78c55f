//! Ordered parallel map used by the grid builders and estimators. Falls back
//! to a sequential loop without the `parallel` feature (e.g. on wasm).

use crate::error::Result;

pub(crate) fn map_ordered<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
