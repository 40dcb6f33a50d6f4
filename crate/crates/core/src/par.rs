//! Index-ordered map over `0..len`, parallel when the `parallel` feature is on.
//! Output order never depends on scheduling.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<T, W, I, F>(len: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> W + Sync + Send,
    F: Fn(&mut W, usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..len)
        .into_par_iter()
        .map_init(&init, |w, i| f(w, i))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<T, W, I, F>(len: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> W,
    F: Fn(&mut W, usize) -> T,
{
    let mut w = init();
    (0..len).map(|i| f(&mut w, i)).collect()
}
