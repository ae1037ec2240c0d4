//! An objective evaluated by an external program, one process per call.
//!
//! The child receives `x_1 x_2 ... x_d\n` on stdin and must print one line
//! holding a finite number on stdout, then exit with status 0.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

use crate::error::{Error, Result};
use crate::objective::ObjectiveFn;

pub const DEFAULT_TIMEOUT_SECS: f64 = 600.0;

#[derive(Debug, Clone)]
pub struct SubprocessObjective {
    program: String,
    args: Vec<String>,
    timeout: Duration,
}

impl SubprocessObjective {
    pub fn new(command: &[String], timeout_secs: f64) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::Config("subprocess command is empty".into()))?;
        if !(timeout_secs.is_finite() && timeout_secs > 0.0) {
            return Err(Error::Config(format!("timeout {timeout_secs} must be positive")));
        }
        Ok(SubprocessObjective {
            program: program.clone(),
            args: args.to_vec(),
            timeout: Duration::from_secs_f64(timeout_secs),
        })
    }

    pub fn request_line(x: &[f64]) -> String {
        let cells: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
        format!("{}\n", cells.join(" "))
    }

    fn call(&self, x: &[f64]) -> Result<f64> {
        let fail = |msg: String| Error::Evaluation(format!("{}: {msg}", self.program));
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| fail(format!("cannot start: {e}")))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            // a child that exits without reading closes the pipe; its exit
            // status is the more useful error
            let _ = stdin.write_all(Self::request_line(x).as_bytes());
        }
        let status = match child.wait_timeout(self.timeout).map_err(|e| fail(e.to_string()))? {
            Some(s) => s,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(fail(format!("timed out after {:?}", self.timeout)));
            }
        };
        let mut out = String::new();
        child
            .stdout
            .take()
            .expect("piped stdout")
            .read_to_string(&mut out)
            .map_err(|e| fail(e.to_string()))?;
        if !status.success() {
            return Err(fail(format!("exited with {status}")));
        }
        parse_response(&out).map_err(fail)
    }
}

fn parse_response(out: &str) -> std::result::Result<f64, String> {
    let mut lines = out.lines().filter(|l| !l.trim().is_empty());
    let line = lines.next().ok_or("no output")?;
    if lines.next().is_some() {
        return Err("more than one output line".into());
    }
    let v: f64 = line
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse {:?} as a number", line.trim()))?;
    if !v.is_finite() {
        return Err(format!("non-finite value {v}"));
    }
    Ok(v)
}

impl ObjectiveFn for SubprocessObjective {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.call(x)
    }
}
