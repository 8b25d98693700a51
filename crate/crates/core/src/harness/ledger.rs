use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mentalism::{MentalismOutcome, RoutineParams};
use crate::transcript::{AnswerLabel, DecodeConfig, Transcript};
use crate::yesno::{Ablation, Constraint, TrialStatus};

pub const TRANSCRIPTS_FILE: &str = "transcripts.jsonl";

/// Game-specific part of a persisted trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "snake_case")]
pub enum TrialDetail {
    Number {
        n: u32,
        index: u32,
        trial: u32,
        decode: DecodeConfig,
        label: AnswerLabel,
    },
    Yesno {
        trial: u32,
        max_steps: u32,
        ablation: Ablation,
        target: Option<String>,
        status: TrialStatus,
        constraints: Vec<Constraint>,
    },
    Mentalism {
        trial: u32,
        params: RoutineParams,
        cot: bool,
        outcome: MentalismOutcome,
    },
}

/// One line of `transcripts.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialLine {
    pub trial_id: String,
    pub detail: TrialDetail,
    pub transcript: Transcript,
}

/// Append-only record of completed trials.
pub struct RunLedger {
    path: PathBuf,
    ids: BTreeSet<String>,
    lines: Vec<TrialLine>,
    writer: Option<BufWriter<File>>,
}

impl RunLedger {
    pub fn path_in(out_dir: &Path) -> PathBuf {
        out_dir.join(TRANSCRIPTS_FILE)
    }

    /// Scans an existing ledger. A torn final line (crash mid-write) is
    /// dropped and truncated away; a bad line anywhere else is an error.
    pub fn open(out_dir: &Path) -> Result<Self> {
        let path = Self::path_in(out_dir);
        let mut ledger = RunLedger {
            path: path.clone(),
            ids: BTreeSet::new(),
            lines: Vec::new(),
            writer: None,
        };
        if !path.exists() {
            return Ok(ledger);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut good_len = 0usize;
        let mut offset = 0usize;
        let mut rest = text.as_str();
        while !rest.is_empty() {
            let (line, complete) = match rest.find('\n') {
                Some(i) => (&rest[..i], true),
                None => (rest, false),
            };
            let consumed = line.len() + complete as usize;
            let last = offset + consumed == text.len();
            match serde_json::from_str::<TrialLine>(line) {
                Ok(record) if complete => {
                    ledger.insert(record)?;
                    good_len = offset + consumed;
                }
                Ok(_) | Err(_) if last => {
                    warn!("dropping torn final line of {}", path.display());
                    break;
                }
                Ok(_) => unreachable!("only the last line can lack a newline"),
                Err(e) => {
                    return Err(Error::State(format!(
                        "{}: corrupt record at byte {offset}: {e}",
                        path.display()
                    )))
                }
            }
            offset += consumed;
            rest = &rest[consumed..];
        }
        if good_len < text.len() {
            let f = OpenOptions::new()
                .write(true)
                .open(&path)
                .map_err(|e| Error::io(&path, e))?;
            f.set_len(good_len as u64).map_err(|e| Error::io(&path, e))?;
        }
        Ok(ledger)
    }

    fn insert(&mut self, line: TrialLine) -> Result<()> {
        if !self.ids.insert(line.trial_id.clone()) {
            return Err(Error::State(format!(
                "trial `{}` recorded twice in {}",
                line.trial_id,
                self.path.display()
            )));
        }
        self.lines.push(line);
        Ok(())
    }

    pub fn contains(&self, trial_id: &str) -> bool {
        self.ids.contains(trial_id)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> &[TrialLine] {
        &self.lines
    }

    /// Opens the file for appending, creating it if needed.
    pub fn touch(&mut self) -> Result<()> {
        if self.writer.is_none() {
            let f = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| Error::io(&self.path, e))?;
            self.writer = Some(BufWriter::new(f));
        }
        Ok(())
    }

    /// Persists one record and flushes it before returning.
    pub fn append(&mut self, line: TrialLine) -> Result<()> {
        if self.contains(&line.trial_id) {
            return Err(Error::State(format!("trial `{}` already recorded", line.trial_id)));
        }
        self.touch()?;
        let mut json = serde_json::to_string(&line)?;
        json.push('\n');
        let w = self.writer.as_mut().expect("writer opened above");
        w.write_all(json.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&self.path, e))?;
        self.insert(line)
    }

    /// Rewrites the file with records in the given id order.
    pub fn rewrite_sorted(&mut self, order: &[String]) -> Result<()> {
        let pos: std::collections::HashMap<&str, usize> = order
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        self.lines
            .sort_by_key(|l| pos.get(l.trial_id.as_str()).copied().unwrap_or(usize::MAX));
        self.writer = None;
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(&serde_json::to_string(l)?);
            out.push('\n');
        }
        let tmp = self.path.with_extension("jsonl.tmp");
        std::fs::write(&tmp, out).map_err(|e| Error::io(&tmp, e))?;
        std::fs::rename(&tmp, &self.path).map_err(|e| Error::io(&self.path, e))
    }
}
