//! Simulation harness: compile a design with a testbench, run it, parse
//! per-case results, and compute the pass-rate reward in [0, 1].
//!
//! Two backends sit behind the same interface: the built-in interpreter
//! (default) and an external command-template toolchain (iverilog/vvp
//! style). Case results are read from testbench output lines matching
//! `Test Case <N> ... Passed` / `... Failed` (case-insensitive verdict).

pub mod external;
pub mod interp;

use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::augment::Testbench;
use crate::error::{Error, Result};
use external::ExternalToolchain;

/// Outcome of compiling one (design, bench) pair. Failure is a value, not an
/// error: it feeds reward 0 and reflection feedback.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompileResult {
    pub ok: bool,
    /// Compiler stderr, truncated to 4 KiB. Empty implies `ok`.
    pub diagnostics: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseResult {
    pub index: u64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimOutcome {
    /// Parsed case verdicts, strictly increasing by index (last occurrence
    /// wins on duplicates).
    pub per_case: Vec<CaseResult>,
    pub timed_out: bool,
    /// Last 4 KiB of simulator stdout.
    pub raw_tail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassRate {
    pub passed: usize,
    pub total: usize,
    pub value: f64,
}

impl PassRate {
    pub fn new(passed: usize, total: usize) -> Self {
        let value = if total == 0 {
            0.0
        } else {
            passed as f64 / total as f64
        };
        PassRate {
            passed,
            total,
            value,
        }
    }
}

/// Per-bench detail kept for reflection feedback.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchOutcome {
    pub bench_id: String,
    pub compile_ok: bool,
    pub diagnostics: String,
    pub timed_out: bool,
    pub passed: usize,
    pub case_count: usize,
    pub failed_lines: Vec<String>,
}

/// Pass rate plus the raw material for a feedback string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreDetail {
    pub rate: PassRate,
    pub benches: Vec<BenchOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardGranularity {
    /// Pool test cases across all benches (denser signal).
    Case,
    /// One unit per bench, scored only when every case passes.
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolchainKind {
    /// External if the compile executable is on PATH, else builtin.
    Auto,
    Builtin,
    External,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolchainConfig {
    pub kind: ToolchainKind,
    pub compile_cmd: String,
    pub run_cmd: String,
}

impl Default for ToolchainConfig {
    fn default() -> Self {
        ToolchainConfig {
            kind: ToolchainKind::Auto,
            compile_cmd: "iverilog -g2012 -o {out} {files}".to_string(),
            run_cmd: "vvp {out}".to_string(),
        }
    }
}

enum Backend {
    Builtin,
    External(ExternalToolchain),
}

/// Compiled artifact handle; present only when compilation succeeded.
pub struct Compiled {
    pub result: CompileResult,
    artifact: Option<Artifact>,
}

enum Artifact {
    Builtin(interp::Design),
    External(PathBuf),
}

pub struct Harness {
    backend: Backend,
    pool: rayon::ThreadPool,
}

impl Harness {
    /// Probe the configured toolchain. External selection fails with
    /// `ToolchainMissing` when the compile executable cannot be found;
    /// `Auto` falls back to the built-in interpreter.
    pub fn probe(cfg: &ToolchainConfig, workers: usize) -> Result<Harness> {
        let tc = ExternalToolchain {
            compile_cmd: cfg.compile_cmd.clone(),
            run_cmd: cfg.run_cmd.clone(),
        };
        let exe_found = tc
            .compile_exe()
            .map(external::find_in_path)
            .unwrap_or(false);
        let backend = match cfg.kind {
            ToolchainKind::Builtin => Backend::Builtin,
            ToolchainKind::External => {
                if exe_found {
                    Backend::External(tc)
                } else {
                    return Err(Error::ToolchainMissing(format!(
                        "'{}' not found on PATH",
                        tc.compile_exe().unwrap_or("<empty>")
                    )));
                }
            }
            ToolchainKind::Auto => {
                if exe_found {
                    Backend::External(tc)
                } else {
                    Backend::Builtin
                }
            }
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        Ok(Harness { backend, pool })
    }

    /// Built-in interpreter backend with the given worker count.
    pub fn builtin(workers: usize) -> Harness {
        Self::probe(
            &ToolchainConfig {
                kind: ToolchainKind::Builtin,
                ..ToolchainConfig::default()
            },
            workers,
        )
        .expect("builtin backend always probes")
    }

    pub fn backend_name(&self) -> &'static str {
        match self.backend {
            Backend::Builtin => "builtin",
            Backend::External(_) => "external",
        }
    }

    /// Compile a design together with a bench (either may be empty). All
    /// artifacts stay inside `workdir`.
    pub fn compile(&self, design: &str, bench: &str, workdir: &Path) -> Result<Compiled> {
        std::fs::create_dir_all(workdir)?;
        let design_path = workdir.join("design.v");
        let bench_path = workdir.join("bench.v");
        std::fs::write(&design_path, design)?;
        std::fs::write(&bench_path, bench)?;
        match &self.backend {
            Backend::Builtin => match interp::compile(&[("design", design), ("bench", bench)]) {
                Ok(d) => Ok(Compiled {
                    result: CompileResult {
                        ok: true,
                        diagnostics: String::new(),
                    },
                    artifact: Some(Artifact::Builtin(d)),
                }),
                Err(e) => Ok(Compiled {
                    result: CompileResult {
                        ok: false,
                        diagnostics: truncate(&e.message, 4096),
                    },
                    artifact: None,
                }),
            },
            Backend::External(tc) => {
                let out = workdir.join("sim.out");
                let mut files = vec![design_path];
                if !bench.trim().is_empty() {
                    files.push(bench_path);
                } else {
                    // keep single-file compiles single-file
                    let _ = std::fs::remove_file(&bench_path);
                }
                let (ok, diag) = tc.compile(&files, &out)?;
                Ok(Compiled {
                    result: CompileResult {
                        ok,
                        diagnostics: if ok { String::new() } else { truncate(&diag, 4096) },
                    },
                    artifact: ok.then_some(Artifact::External(out)),
                })
            }
        }
    }

    /// Run a compiled artifact; the process (or interpreter) is cut off at
    /// `timeout`, keeping whatever cases were printed before the kill.
    pub fn run(&self, compiled: &Compiled, timeout: Duration) -> Result<SimOutcome> {
        let artifact = compiled.artifact.as_ref().ok_or_else(|| {
            Error::Config("run called on a failed compile".to_string())
        })?;
        let (stdout, timed_out) = match artifact {
            Artifact::Builtin(design) => {
                let limits = interp::RunLimits {
                    max_steps: 4_000_000,
                    wall: Some(timeout),
                };
                let r = interp::simulate(design, &limits);
                (r.stdout, r.timed_out)
            }
            Artifact::External(path) => match &self.backend {
                Backend::External(tc) => tc.run(path, timeout)?,
                Backend::Builtin => unreachable!("artifact/backend mismatch"),
            },
        };
        Ok(SimOutcome {
            per_case: parse_results(&stdout),
            timed_out,
            raw_tail: tail(&stdout, 4096),
        })
    }

    /// Aggregate pass rate of one design over a set of validated benches.
    ///
    /// Case granularity pools every test case; a bench that fails to compile
    /// counts all of its cases as failed. Bench granularity scores one unit
    /// per bench, earned only by passing every case.
    pub fn pass_rate(
        &self,
        design: &str,
        benches: &[Testbench],
        timeout: Duration,
        granularity: RewardGranularity,
    ) -> Result<ScoreDetail> {
        use rayon::prelude::*;
        let design = design.to_string();
        let outcomes: Vec<Result<BenchOutcome>> = self.pool.install(|| {
            benches
                .par_iter()
                .map(|bench| self.run_bench(&design, bench, timeout))
                .collect()
        });
        let mut benches_out = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            benches_out.push(o?);
        }
        let rate = match granularity {
            RewardGranularity::Case => {
                let total: usize = benches_out.iter().map(|b| b.case_count).sum();
                let passed: usize = benches_out.iter().map(|b| b.passed).sum();
                PassRate::new(passed, total)
            }
            RewardGranularity::Bench => {
                let total = benches_out.len();
                let passed = benches_out
                    .iter()
                    .filter(|b| {
                        b.compile_ok
                            && !b.timed_out
                            && b.case_count > 0
                            && b.passed == b.case_count
                    })
                    .count();
                PassRate::new(passed, total)
            }
        };
        Ok(ScoreDetail {
            rate,
            benches: benches_out,
        })
    }

    fn run_bench(&self, design: &str, bench: &Testbench, timeout: Duration) -> Result<BenchOutcome> {
        let dir = tempfile::tempdir()?;
        let compiled = self.compile(design, &bench.source, dir.path())?;
        if !compiled.result.ok {
            return Ok(BenchOutcome {
                bench_id: bench.id.clone(),
                compile_ok: false,
                diagnostics: compiled.result.diagnostics,
                timed_out: false,
                passed: 0,
                case_count: bench.case_count,
                failed_lines: Vec::new(),
            });
        }
        let outcome = self.run(&compiled, timeout)?;
        let passed = outcome.per_case.iter().filter(|c| c.passed).count();
        let failed_lines = failed_case_lines(&outcome.raw_tail);
        Ok(BenchOutcome {
            bench_id: bench.id.clone(),
            compile_ok: true,
            diagnostics: String::new(),
            timed_out: outcome.timed_out,
            passed,
            case_count: bench.case_count,
            failed_lines,
        })
    }
}

static CASE_RE: OnceLock<regex::Regex> = OnceLock::new();

fn case_re() -> &'static regex::Regex {
    CASE_RE.get_or_init(|| {
        regex::Regex::new(r"(?i)test\s*case\s+(\d+).*?\b(passed|failed)\b").unwrap()
    })
}

/// Extract per-case verdicts from simulator stdout. Lines that do not match
/// the protocol are ignored; duplicate indices keep the last occurrence.
pub fn parse_results(stdout: &str) -> Vec<CaseResult> {
    let mut cases = std::collections::BTreeMap::new();
    for line in stdout.lines() {
        if let Some(cap) = case_re().captures(line) {
            if let Ok(index) = cap[1].parse::<u64>() {
                let passed = cap[2].eq_ignore_ascii_case("passed");
                cases.insert(index, passed);
            }
        }
    }
    cases
        .into_iter()
        .map(|(index, passed)| CaseResult { index, passed })
        .collect()
}

fn failed_case_lines(stdout: &str) -> Vec<String> {
    stdout
        .lines()
        .filter(|l| {
            case_re()
                .captures(l)
                .map(|c| c[2].eq_ignore_ascii_case("failed"))
                .unwrap_or(false)
        })
        .map(str::to_string)
        .collect()
}

fn truncate(s: &str, limit: usize) -> String {
    if s.len() <= limit {
        s.to_string()
    } else {
        let mut end = limit;
        while !s.is_char_boundary(end) {
            end -= 1;
        }
        s[..end].to_string()
    }
}

fn tail(s: &str, limit: usize) -> String {
    if s.len() <= limit {
        s.to_string()
    } else {
        let mut start = s.len() - limit;
        while !s.is_char_boundary(start) {
            start += 1;
        }
        s[start..].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTER: &str = r#"
module counter (input clk, input rst, input en, output reg [3:0] count);
    always @(posedge clk) begin
        if (rst) count <= 4'b0000;
        else if (en) count <= count + 1;
    end
endmodule
"#;

    fn simple_bench(cases: usize) -> Testbench {
        // a bench that pulses reset then counts, printing one line per case
        let mut body = String::from(
            r#"
module tb;
  reg clk = 0, rst = 0, en = 0;
  wire [3:0] count;
  counter dut (.clk(clk), .rst(rst), .en(en), .count(count));
  always #5 clk = ~clk;
  initial begin
    rst = 1; #12; rst = 0; en = 1;
"#,
        );
        for i in 1..=cases {
            body.push_str(&format!(
                r#"    #10;
    if (count !== 4'd{i}) $display("Test Case {i} Failed: count = %d", count);
    else $display("Test Case {i} Passed");
"#
            ));
        }
        body.push_str("    $finish;\n  end\nendmodule\n");
        Testbench {
            id: "tb0".to_string(),
            source: body,
            case_count: cases,
        }
    }

    #[test]
    fn parse_results_protocol() {
        let out = "noise\nTest Case 1 Passed: V = 1\nTest Case 3 Failed: Expected V = 1\nblah\nTEST CASE 2 passed\n";
        let cases = parse_results(out);
        assert_eq!(
            cases,
            vec![
                CaseResult { index: 1, passed: true },
                CaseResult { index: 2, passed: true },
                CaseResult { index: 3, passed: false },
            ]
        );
    }

    #[test]
    fn parse_results_duplicate_keeps_last() {
        let out = "Test Case 1 Failed\nTest Case 1 Passed\n";
        assert_eq!(parse_results(out), vec![CaseResult { index: 1, passed: true }]);
        assert!(parse_results("nothing here").is_empty());
    }

    #[test]
    fn correct_counter_full_marks() {
        let h = Harness::builtin(2);
        let detail = h
            .pass_rate(
                COUNTER,
                &[simple_bench(5)],
                Duration::from_secs(10),
                RewardGranularity::Case,
            )
            .unwrap();
        assert_eq!(detail.rate.passed, 5);
        assert_eq!(detail.rate.total, 5);
        assert_eq!(detail.rate.value, 1.0);
    }

    #[test]
    fn syntax_error_scores_zero() {
        let h = Harness::builtin(2);
        let broken = "module counter (input clk, output reg [3:0] count);\n  always @(posedge clk) begin\n    count <= count + 1;\nendmodule\n";
        let detail = h
            .pass_rate(
                broken,
                &[simple_bench(5)],
                Duration::from_secs(10),
                RewardGranularity::Case,
            )
            .unwrap();
        assert_eq!(detail.rate.value, 0.0);
        assert!(!detail.benches[0].compile_ok);
        assert!(!detail.benches[0].diagnostics.is_empty());
    }

    #[test]
    fn bench_missing_module_fails_compile() {
        let h = Harness::builtin(1);
        let dir = tempfile::tempdir().unwrap();
        let compiled = h
            .compile("module foo(output y); assign y = 0; endmodule", &simple_bench(2).source, dir.path())
            .unwrap();
        assert!(!compiled.result.ok);
        assert!(compiled.result.diagnostics.contains("unknown module"));
    }

    #[test]
    fn timeout_flagged_without_finish() {
        let h = Harness::builtin(1);
        let bench = Testbench {
            id: "endless".to_string(),
            source: r#"
module tb;
  reg clk = 0;
  wire [3:0] count;
  counter dut (.clk(clk), .rst(clk), .en(clk), .count(count));
  always #5 clk = ~clk;
  initial $display("running");
endmodule
"#
            .to_string(),
            case_count: 1,
        };
        let detail = h
            .pass_rate(COUNTER, &[bench], Duration::from_secs(10), RewardGranularity::Case)
            .unwrap();
        assert!(detail.benches[0].timed_out);
        assert_eq!(detail.rate.value, 0.0);
    }

    #[test]
    fn granularity_bench_counts_whole_benches() {
        let h = Harness::builtin(2);
        // one bench fully passing, one with an impossible expectation
        let mut bad = simple_bench(2);
        bad.id = "bad".to_string();
        bad.source = bad.source.replace("4'd2", "4'd9");
        let detail = h
            .pass_rate(
                COUNTER,
                &[simple_bench(3), bad],
                Duration::from_secs(10),
                RewardGranularity::Bench,
            )
            .unwrap();
        assert_eq!(detail.rate.passed, 1);
        assert_eq!(detail.rate.total, 2);
    }

    #[test]
    fn determinism_across_runs_and_workers() {
        let h = Harness::builtin(8);
        let benches: Vec<Testbench> = (0..4)
            .map(|i| {
                let mut b = simple_bench(3 + i);
                b.id = format!("tb{i}");
                b
            })
            .collect();
        let first = h
            .pass_rate(COUNTER, &benches, Duration::from_secs(10), RewardGranularity::Case)
            .unwrap();
        for _ in 0..3 {
            let again = h
                .pass_rate(COUNTER, &benches, Duration::from_secs(10), RewardGranularity::Case)
                .unwrap();
            assert_eq!(again.rate, first.rate);
            for (a, b) in again.benches.iter().zip(first.benches.iter()) {
                assert_eq!(a.passed, b.passed);
                assert_eq!(a.bench_id, b.bench_id);
            }
        }
    }
}
