//! Per-row walk statistics and the stack scan that extracts several
//! independent walks from one simulation.

use crate::error::{Error, Result};

/// One walk credited to a start node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WalkCredit {
    pub start: usize,
    /// Home where the walk ended; `None` for the initial home.
    pub end: Option<usize>,
    /// Edges traversed, the final step into the home included.
    pub length: u64,
    /// Product of scaling signs along the walk.
    pub sign: i8,
    /// Signed visits to `start`, the initial visit included.
    pub visits: i64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RowRecord {
    /// Multi-step walks credited to this row.
    pub walks: u64,
    pub length_sum: u64,
    pub length_sq_sum: u128,
    /// Signed self-visit total, `J_kk` restricted to multi-step walks.
    pub self_visits: i64,
    /// Signed hits per created home `i < k`.
    pub ends: Vec<(usize, i64)>,
    /// Signed hits on the initial home.
    pub escapes: i64,
}

impl RowRecord {
    fn add(&mut self, c: &WalkCredit) {
        self.walks += 1;
        self.length_sum += c.length;
        self.length_sq_sum += (c.length as u128) * (c.length as u128);
        self.self_visits += c.visits;
        let s = c.sign as i64;
        match c.end {
            None => self.escapes += s,
            Some(i) => match self.ends.iter_mut().find(|e| e.0 == i) {
                Some(e) => e.1 += s,
                None => self.ends.push((i, s)),
            },
        }
    }

    pub fn hits(&self, i: usize) -> i64 {
        self.ends.iter().find(|e| e.0 == i).map_or(0, |e| e.1)
    }
}

/// Walk statistics for every row of the permuted matrix.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PrecondJourneyRecord {
    rows: Vec<RowRecord>,
}

impl PrecondJourneyRecord {
    pub fn new(n: usize) -> Self {
        Self { rows: vec![RowRecord::default(); n] }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, k: usize) -> &RowRecord {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[RowRecord] {
        &self.rows
    }

    pub(crate) fn rows_mut(&mut self) -> &mut [RowRecord] {
        &mut self.rows
    }

    /// Credits one multi-step walk to its start row.
    pub fn accumulate_walk(&mut self, credit: &WalkCredit) -> Result<()> {
        check_credit(credit)?;
        self.rows[credit.start].add(credit);
        Ok(())
    }
}

pub(crate) fn check_credit(c: &WalkCredit) -> Result<()> {
    if let Some(end) = c.end {
        if end >= c.start {
            return Err(Error::IllegalWalkEnd { start: c.start, end });
        }
    }
    if c.length < 2 {
        return Err(Error::OneStepWalk { start: c.start, length: c.length });
    }
    Ok(())
}

pub(crate) fn add_unchecked(row: &mut RowRecord, c: &WalkCredit) {
    row.add(c);
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    node: usize,
    pos: u64,
    sign: i8,
    visits: i64,
}

/// Stack scan over a walk fed one node at a time.
///
/// The stack holds the strictly increasing run of candidate start nodes.
/// A node smaller than the top ends the walk from the top; a larger one
/// opens a new candidate; an equal one is a return visit. With reuse off
/// only the first node is ever a candidate.
#[derive(Debug)]
pub(crate) struct ReuseScan {
    stack: Vec<Entry>,
    pos: u64,
    reuse: bool,
    /// Start node and closing position of every credited walk.
    #[cfg(debug_assertions)]
    closed: Vec<(usize, u64)>,
}

impl ReuseScan {
    pub(crate) fn new(start: usize, reuse: bool) -> Self {
        Self {
            stack: vec![Entry { node: start, pos: 1, sign: 1, visits: 1 }],
            pos: 1,
            reuse,
            #[cfg(debug_assertions)]
            closed: Vec::new(),
        }
    }

    /// Next node of the walk, reached with cumulative sign `sign`; `node`
    /// must not be below the first node.
    pub(crate) fn visit(&mut self, node: usize, sign: i8, out: &mut impl FnMut(WalkCredit)) {
        self.pos += 1;
        if !self.reuse {
            let bottom = &mut self.stack[0];
            if node == bottom.node {
                bottom.visits += (sign * bottom.sign) as i64;
            }
            return;
        }
        self.pop_above(node, Some(node), sign, out);
        let top = self.stack.last_mut().expect("the first node is never popped here");
        if node > top.node {
            self.stack.push(Entry { node, pos: self.pos, sign, visits: 1 });
        } else {
            top.visits += (sign * top.sign) as i64;
        }
    }

    /// Ends the walk at home `end` (`None` for the initial home).
    pub(crate) fn finish(mut self, end: Option<usize>, sign: i8, out: &mut impl FnMut(WalkCredit)) {
        self.pos += 1;
        while let Some(e) = self.stack.pop() {
            self.credit(e, end, sign, out);
        }
    }

    fn pop_above(&mut self, node: usize, end: Option<usize>, sign: i8, out: &mut impl FnMut(WalkCredit)) {
        while let Some(&top) = self.stack.last() {
            if node >= top.node {
                break;
            }
            self.stack.pop();
            self.credit(top, end, sign, out);
        }
    }

    fn credit(&mut self, e: Entry, end: Option<usize>, sign: i8, out: &mut impl FnMut(WalkCredit)) {
        let length = self.pos - e.pos;
        if length > 1 {
            #[cfg(debug_assertions)]
            {
                if let Some(prev) = self.closed.iter_mut().find(|c| c.0 == e.node) {
                    assert!(prev.1 <= e.pos, "walks from {} overlap", e.node);
                    prev.1 = self.pos;
                } else {
                    self.closed.push((e.node, self.pos));
                }
            }
            out(WalkCredit { start: e.node, end, length, sign: sign * e.sign, visits: e.visits });
        }
    }
}

/// Runs the stack scan over a complete unsigned walk.
///
/// `seq[0]` is the start. If `absorbed`, every element of `seq` is a motel
/// and the walk ended at the initial home; otherwise the last element is
/// the home where it ended. Credits come out in the order walks close.
pub fn extract_reused_walks(seq: &[usize], absorbed: bool) -> Vec<WalkCredit> {
    assert!(!seq.is_empty(), "a walk has at least its start node");
    let mut out = Vec::new();
    let mut push = |c| out.push(c);
    let mut scan = ReuseScan::new(seq[0], true);
    let motels = if absorbed { seq.len() } else { seq.len() - 1 };
    for &node in &seq[1..motels.max(1)] {
        scan.visit(node, 1, &mut push);
    }
    let end = if absorbed { None } else { seq.last().copied() };
    scan.finish(end, 1, &mut push);
    out
}
