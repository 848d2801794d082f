//! Running external method commands.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::placeholders;

pub const STDOUT_FILE: &str = "stdout.txt";
pub const STDERR_FILE: &str = "stderr.txt";

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
pub enum ExecFailure {
    #[error("placeholder {{{0}}} has no substitution")]
    MissingSubstitution(String),
    #[error("could not start command: {0}")]
    Spawn(String),
    #[error("exited with status {0}")]
    ExitCode(i32),
    #[error("killed by signal {0}")]
    Signal(i32),
    #[error("timed out after {0} s")]
    Timeout(f64),
    #[error("output file {0} was not created")]
    MissingOutput(String),
    #[error("output file {0} is empty")]
    EmptyOutput(String),
    #[error("bad output: {0}")]
    BadOutput(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecRecord {
    pub command: String,
    pub exit_code: Option<i32>,
    pub stdout_path: PathBuf,
    pub stderr_path: PathBuf,
    pub output_path: PathBuf,
    pub wall_seconds: f64,
    pub failure: Option<ExecFailure>,
}

impl ExecRecord {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Wraps `s` in single quotes unless it only has shell-safe characters.
pub fn shell_quote(s: &str) -> String {
    let safe = !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "-_./:=,+@%".contains(c));
    if safe {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

/// Replaces every `{name}` with the shell-quoted substitution.
pub fn render_command(template: &str, subs: &BTreeMap<String, String>) -> Result<String, ExecFailure> {
    let mut out = template.to_string();
    for name in placeholders(template) {
        let value = subs
            .get(&name)
            .ok_or_else(|| ExecFailure::MissingSubstitution(name.clone()))?;
        out = out.replace(&format!("{{{name}}}"), &shell_quote(value));
    }
    Ok(out)
}

const KEPT_ENV: [&str; 6] = ["PATH", "HOME", "LANG", "LC_ALL", "TMPDIR", "USER"];

/// Runs `sh -c command` inside `scratch` with a sanitized environment plus
/// `LINKBENCH_SEED`. On timeout the whole process group is killed.
/// Success means exit status 0 and a non-empty `output` file.
pub fn execute_external(command: &str, scratch: &Path, output: &Path, timeout: Duration, seed: u64) -> ExecRecord {
    let stdout_path = scratch.join(STDOUT_FILE);
    let stderr_path = scratch.join(STDERR_FILE);
    let mut record = ExecRecord {
        command: command.to_string(),
        exit_code: None,
        stdout_path: stdout_path.clone(),
        stderr_path: stderr_path.clone(),
        output_path: output.to_path_buf(),
        wall_seconds: 0.0,
        failure: None,
    };
    let spawn_err = |e: std::io::Error| ExecFailure::Spawn(e.to_string());
    let files =
        fs::create_dir_all(scratch).and_then(|_| Ok((File::create(&stdout_path)?, File::create(&stderr_path)?)));
    let (out, err) = match files {
        Ok(f) => f,
        Err(e) => {
            record.failure = Some(spawn_err(e));
            return record;
        }
    };

    let mut cmd = Command::new("sh");
    cmd.arg("-c")
        .arg(command)
        .current_dir(scratch)
        .stdin(Stdio::null())
        .stdout(out)
        .stderr(err)
        .env_clear()
        .process_group(0);
    for key in KEPT_ENV {
        if let Ok(v) = std::env::var(key) {
            cmd.env(key, v);
        }
    }
    cmd.env("LINKBENCH_SEED", seed.to_string());

    log::debug!("running in {}: {command}", scratch.display());
    let start = Instant::now();
    let mut child = match cmd.spawn() {
        Ok(c) => c,
        Err(e) => {
            record.failure = Some(spawn_err(e));
            return record;
        }
    };
    let pgid = child.id() as i32;
    let deadline = start + timeout;
    let mut pause = Duration::from_millis(2);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break Some(status),
            Ok(None) if Instant::now() >= deadline => break None,
            Ok(None) => {
                thread::sleep(pause.min(deadline.saturating_duration_since(Instant::now())));
                pause = (pause * 2).min(Duration::from_millis(50));
            }
            Err(e) => {
                record.failure = Some(spawn_err(e));
                break None;
            }
        }
    };
    // leftover children in the group go too
    unsafe {
        libc::kill(-pgid, libc::SIGKILL);
    }
    let status = match status {
        Some(s) => s,
        None => {
            let _ = child.wait();
            record.wall_seconds = start.elapsed().as_secs_f64();
            if record.failure.is_none() {
                record.failure = Some(ExecFailure::Timeout(timeout.as_secs_f64()));
            }
            return record;
        }
    };
    record.wall_seconds = start.elapsed().as_secs_f64();
    record.exit_code = status.code();
    // file name only, so failure text does not depend on the output location
    let shown = output
        .file_name()
        .map_or_else(|| output.display().to_string(), |n| n.to_string_lossy().into_owned());

    use std::os::unix::process::ExitStatusExt;
    record.failure = match (status.code(), status.signal()) {
        (Some(0), _) => match fs::metadata(output) {
            Err(_) => Some(ExecFailure::MissingOutput(shown)),
            Ok(m) if m.len() == 0 => Some(ExecFailure::EmptyOutput(shown)),
            Ok(_) => None,
        },
        (Some(code), _) => Some(ExecFailure::ExitCode(code)),
        (None, Some(sig)) => Some(ExecFailure::Signal(sig)),
        (None, None) => Some(ExecFailure::Spawn("unknown exit status".to_string())),
    };
    record
}

/// Last few lines of the captured stderr, for failure messages.
pub fn stderr_tail(record: &ExecRecord, lines: usize) -> String {
    let text = fs::read_to_string(&record.stderr_path).unwrap_or_default();
    let all: Vec<&str> = text.lines().collect();
    all[all.len().saturating_sub(lines)..].join(" | ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subs(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn quoting() {
        assert_eq!(shell_quote("a/b.txt"), "a/b.txt");
        assert_eq!(shell_quote("with space"), "'with space'");
        assert_eq!(shell_quote("it's"), r"'it'\''s'");
        assert_eq!(shell_quote(""), "''");
    }

    #[test]
    fn rendering() {
        let s = subs(&[("output", "/tmp/o u t"), ("dim", "8")]);
        assert_eq!(
            render_command("x -d {dim} > {output}", &s).unwrap(),
            "x -d 8 > '/tmp/o u t'"
        );
        assert_eq!(
            render_command("x {k} {output}", &s),
            Err(ExecFailure::MissingSubstitution("k".to_string()))
        );
    }

    #[test]
    fn copy_command_succeeds() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        fs::write(&input, "0 1\n").unwrap();
        let output = dir.path().join("out.txt");
        let cmd = render_command(
            "cp {train_net} {output}",
            &subs(&[
                ("train_net", input.to_str().unwrap()),
                ("output", output.to_str().unwrap()),
            ]),
        )
        .unwrap();
        let r = execute_external(&cmd, &dir.path().join("scratch"), &output, Duration::from_secs(10), 1);
        assert!(r.succeeded(), "{:?}", r.failure);
        assert_eq!(r.exit_code, Some(0));
        assert_eq!(fs::read_to_string(output).unwrap(), "0 1\n");
    }

    #[test]
    fn failures_are_records() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let r = execute_external("echo oops >&2; exit 1", dir.path(), &out, Duration::from_secs(10), 1);
        assert_eq!(r.failure, Some(ExecFailure::ExitCode(1)));
        assert_eq!(stderr_tail(&r, 3), "oops");
        let r = execute_external("true", dir.path(), &out, Duration::from_secs(10), 1);
        assert!(matches!(r.failure, Some(ExecFailure::MissingOutput(_))));
        let r = execute_external(": > o", dir.path(), &out, Duration::from_secs(10), 1);
        assert!(matches!(r.failure, Some(ExecFailure::EmptyOutput(_))));
    }

    #[test]
    fn seed_and_environment() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        std::env::set_var("LINKBENCH_TEST_SECRET", "x");
        let r = execute_external(
            "echo \"$LINKBENCH_SEED ${LINKBENCH_TEST_SECRET:-unset}\" > o",
            dir.path(),
            &out,
            Duration::from_secs(10),
            99,
        );
        assert!(r.succeeded());
        assert_eq!(fs::read_to_string(out).unwrap(), "99 unset\n");
    }

    #[test]
    fn timeout_kills_the_group() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let r = execute_external("sleep 30 & sleep 30", dir.path(), &out, Duration::from_secs(1), 1);
        assert_eq!(r.failure, Some(ExecFailure::Timeout(1.0)));
        assert!((r.wall_seconds - 1.0).abs() <= 1.0, "{}", r.wall_seconds);
    }
}
