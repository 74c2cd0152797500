//! Several scenarios from a list file, optionally in parallel.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::scenario::{load_config, run_scenario, RunRequest, ScenarioError, ScenarioReport};

/// Non-empty, non-comment lines of a batch list, each a config path or preset name.
///
/// Relative paths are taken relative to the list file.
pub fn parse_batch_list(text: &str, base: &Path) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let p = base.join(l);
            if Path::new(l).is_relative() && p.exists() {
                p.to_string_lossy().into_owned()
            } else {
                l.to_string()
            }
        })
        .collect()
}

pub type BatchOutcome = (String, Result<ScenarioReport, ScenarioError>);

/// Runs every entry with at most `jobs` worker threads.
///
/// Each scenario writes to `out_root/<name>`; repeated names get a numeric
/// suffix. Results come back in input order.
pub fn run_batch(
    entries: &[String],
    template: &RunRequest,
    out_root: &Path,
    jobs: usize,
) -> Vec<BatchOutcome> {
    let configs: Vec<_> = entries.iter().map(|e| load_config(e)).collect();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let dirs: Vec<PathBuf> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let name = c
                .as_ref()
                .map_or_else(|_| format!("entry-{}", i + 1), |c| c.name.clone());
            let count = seen.entry(name.clone()).or_insert(0);
            *count += 1;
            match *count {
                1 => out_root.join(name),
                k => out_root.join(format!("{name}-{k}")),
            }
        })
        .collect();
    let configs: Vec<_> = configs.into_iter().map(|c| Mutex::new(Some(c))).collect();

    let slots: Vec<Mutex<Option<Result<ScenarioReport, ScenarioError>>>> =
        (0..entries.len()).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= entries.len() {
            break;
        }
        let config = configs[i].lock().expect("config lock").take();
        let result = match config.expect("each entry is taken once") {
            Err(e) => Err(e),
            Ok(config) => {
                let request = RunRequest {
                    out_dir: Some(dirs[i].clone()),
                    ..template.clone()
                };
                run_scenario(&config, &request)
            }
        };
        *slots[i].lock().expect("slot lock") = Some(result);
    };
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, entries.len().max(1)) {
            s.spawn(work);
        }
    });

    entries
        .iter()
        .cloned()
        .zip(slots)
        .map(|(e, slot)| {
            (
                e,
                slot.into_inner()
                    .expect("slot lock")
                    .expect("every entry ran"),
            )
        })
        .collect()
}
