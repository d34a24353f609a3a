use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The generator for one trial: the run seed picks the key, the trial index
/// picks the stream, so no trial can observe another's draws.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `f(0..n)` on `jobs` workers and returns the results by trial index.
pub fn run_indexed<T, F>(n: u64, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    let mut out: Vec<(u64, T)> = pool.install(|| (0..n).into_par_iter().map(|t| (t, f(t))).collect());
    out.sort_by_key(|(t, _)| *t);
    out.into_iter().map(|(_, x)| x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_do_not_depend_on_scheduling() {
        let one = run_indexed(64, 1, |t| trial_rng(9, t).gen::<u64>());
        let many = run_indexed(64, 8, |t| trial_rng(9, t).gen::<u64>());
        assert_eq!(one, many);
        assert_ne!(one[0], one[1]);
        assert_ne!(trial_rng(9, 0).gen::<u64>(), trial_rng(10, 0).gen::<u64>());
    }
}
