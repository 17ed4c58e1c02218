//! Parametric search driven by boxsort.
//!
//! Boxsort marks ⌊√n̂⌋ random items of a subproblem, sorts them by comparing
//! all pairs, routes every other item through a balanced search tree over the
//! sorted marks, and recurses into the resulting boxes. Small subproblems are
//! sorted by all pairs directly.
//!
//! The run is simulated as a dependence network of comparisons. A comparison
//! is *active* once everything it depends on is resolved. Each active
//! comparison carries a weight:
//!
//! * initial comparisons of a subproblem get its base weight `w` (1 at the top);
//! * once the marked items are sorted, each first routing step gets `w/(2n̂²)`;
//! * a routing step passes half its weight to the next step of the same item;
//! * children of a subproblem start with base weight `w/(4n̂^4.5)`.
//!
//! Every turn resolves the weighted median of the active roots, consulting the
//! oracle only if the current interval does not already decide it, and with it
//! every active comparison whose answer follows from that result. Newly
//! activated comparisons wait for later turns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::driver::{
    ceil_log2, default_base_threshold, final_checks, floor_log2, DriverConfig, Fault, InvariantKind,
    Outcome, Violation,
};
use crate::engine::{
    apply_form, finalize, resolve_root, ComparisonForm, Order, Pivot, Problem, RunStats,
    SearchInterval,
};
use crate::error::Error;
use crate::scalar::Scalar;
use crate::selection::{select_weighted_median, ExactSum};

/// Stream of the per-run generator reserved for median selection.
const SELECTION_STREAM: u64 = 1;

/// Relative slack for comparing floating-point weight totals.
const WEIGHT_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    MarkSort,
    Routing,
    BaseCase,
    Done,
}

/// Perfectly balanced binary search tree over `len` sorted pivots, stored
/// implicitly: a node is a half-open range of pivot positions keyed by its
/// middle element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PivotTree {
    len: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeNode {
    lo: u32,
    hi: u32,
}

impl TreeNode {
    /// Position of this node's pivot in sorted order.
    pub fn pivot(self) -> usize {
        ((self.lo + self.hi) / 2) as usize
    }
}

/// Where an item goes after comparing against a node's pivot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Node(TreeNode),
    /// Box index in `0..=len`; box `k` lies just below pivot `k`.
    Box(usize),
}

impl PivotTree {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "empty pivot tree");
        PivotTree { len }
    }

    pub fn root(&self) -> TreeNode {
        TreeNode { lo: 0, hi: self.len as u32 }
    }

    /// Longest root-to-leaf path, in comparisons.
    pub fn height(&self) -> usize {
        ceil_log2(self.len + 1)
    }

    /// `order` compares the routed item against the node's pivot.
    pub fn descend(node: TreeNode, order: Order) -> Step {
        let mid = (node.lo + node.hi) / 2;
        let (lo, hi) = match order {
            Order::FirstLow => (node.lo, mid),
            Order::FirstHigh => (mid + 1, node.hi),
        };
        if lo == hi {
            Step::Box(lo as usize)
        } else {
            Step::Node(TreeNode { lo, hi })
        }
    }
}

struct Subproblem {
    items: Vec<usize>,
    /// First output position owned by this subproblem.
    offset: usize,
    weight: f64,
    entry_depth: u32,
    phase: Phase,
    /// Items under all-pairs sort; after it, the marked items in order.
    ranked: Vec<usize>,
    wins: Vec<u32>,
    unmarked: Vec<usize>,
    pending: usize,
    boxes: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Pair { sub: usize, a: u32, b: u32 },
    Route { sub: usize, item: usize, node: TreeNode },
}

struct Active {
    form: Pivot,
    weight: f64,
    depth: u32,
    kind: Kind,
}

struct Settled {
    kind: Kind,
    order: Order,
    weight: f64,
    depth: u32,
}

struct Run<'p, P: ?Sized> {
    problem: &'p P,
    threshold: usize,
    subs: Vec<Subproblem>,
    active: Vec<Active>,
    instant: Vec<Settled>,
    perm: Vec<usize>,
    placed: usize,
    mark_rng: ChaCha8Rng,
    select_rng: ChaCha8Rng,
    interval: SearchInterval,
    stats: RunStats,
    violations: Vec<Violation>,
    check: bool,
    fault: Option<Fault>,
}

/// Finds λ* by simulating boxsort under weighted-median scheduling.
pub fn run<P: Problem + ?Sized>(problem: &P, seed: u64, config: &DriverConfig) -> Result<Outcome, Error> {
    let n = problem.item_count();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let mut run = Run::new(problem, seed, config);
    let top = run.new_sub((0..n).collect(), 0, 1.0, 0);
    run.start(top)?;
    run.drain()?;
    while !run.active.is_empty() {
        run.turn()?;
    }
    debug_assert!(run.subs.iter().all(|s| s.phase == Phase::Done));
    if run.placed != n {
        return Err(Error::Instance(format!("only {} of {n} items placed", run.placed)));
    }
    let lambda = finalize(problem, &run.perm, &run.interval)?;
    let mut outcome = Outcome {
        perm: run.perm,
        lambda,
        interval: run.interval,
        stats: run.stats,
        violations: run.violations,
    };
    if config.check_invariants {
        final_checks(problem, &mut outcome);
    }
    Ok(outcome)
}

/// Sorts `items` by running the boxsort skeleton with every comparison known
/// up front.
pub fn boxsort_plain<T, F>(items: &[T], cmp: F) -> Vec<T>
where
    T: Clone,
    F: Fn(&T, &T) -> std::cmp::Ordering,
{
    boxsort_plain_seeded(items, cmp, 0)
}

pub fn boxsort_plain_seeded<T, F>(items: &[T], cmp: F, seed: u64) -> Vec<T>
where
    T: Clone,
    F: Fn(&T, &T) -> std::cmp::Ordering,
{
    if items.is_empty() {
        return Vec::new();
    }
    let problem = Fixed { items, cmp };
    let out = run(&problem, seed, &DriverConfig::default()).expect("constant comparisons cannot fail");
    debug_assert_eq!(out.stats.median_requests, 0);
    out.perm.into_iter().map(|i| items[i].clone()).collect()
}

/// λ-free items: every comparison is constant, ties broken by index.
struct Fixed<'a, T, F> {
    items: &'a [T],
    cmp: F,
}

impl<T, F> Problem for Fixed<'_, T, F>
where
    F: Fn(&T, &T) -> std::cmp::Ordering,
{
    fn item_count(&self) -> usize {
        self.items.len()
    }

    fn compare(&self, i: usize, j: usize) -> ComparisonForm {
        let order = match (self.cmp)(&self.items[i], &self.items[j]) {
            std::cmp::Ordering::Less => Order::FirstLow,
            std::cmp::Ordering::Greater => Order::FirstHigh,
            std::cmp::Ordering::Equal => Order::by_index(i, j),
        };
        ComparisonForm::Constant(order)
    }

    fn oracle(&self, _lambda: &Scalar) -> crate::engine::OracleAnswer {
        unreachable!("constant comparisons never reach the oracle")
    }

    fn recover(&self, _perm: &[usize], _interval: &SearchInterval) -> Result<Scalar, Error> {
        Ok(Scalar::zero())
    }
}

fn pairs(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

fn marked_count(n: usize) -> usize {
    n.isqrt().max(1)
}

/// Weight of each first routing step in a subproblem of `n` items.
fn routing_weight(base: f64, n: usize) -> f64 {
    base / (2.0 * (n as f64).powi(2))
}

fn routing_depth(entry: u32, n: usize) -> u32 {
    entry + floor_log2(n) as u32 + 2
}

/// Base weight of the children of a subproblem of `n` items.
fn child_weight(base: f64, n: usize) -> f64 {
    base / (4.0 * (n as f64).powf(4.5))
}

/// `m` is the number of marked items.
fn child_depth(entry: u32, n: usize, m: usize) -> u32 {
    entry + 2 * (floor_log2(n) as u32 + 1) + ceil_log2(m + 1) as u32 + 2
}

impl<'p, P: Problem + ?Sized> Run<'p, P> {
    fn new(problem: &'p P, seed: u64, config: &DriverConfig) -> Self {
        let n = problem.item_count();
        let mut select_rng = ChaCha8Rng::seed_from_u64(seed);
        select_rng.set_stream(SELECTION_STREAM);
        Run {
            problem,
            threshold: config.base_threshold.unwrap_or_else(|| default_base_threshold(n)),
            subs: Vec::new(),
            active: Vec::new(),
            instant: Vec::new(),
            perm: vec![usize::MAX; n],
            placed: 0,
            mark_rng: ChaCha8Rng::seed_from_u64(seed),
            select_rng,
            interval: SearchInterval::unbounded(),
            stats: RunStats::default(),
            violations: Vec::new(),
            check: config.check_invariants,
            fault: config.fault,
        }
    }

    fn new_sub(&mut self, items: Vec<usize>, offset: usize, weight: f64, entry_depth: u32) -> usize {
        self.subs.push(Subproblem {
            items,
            offset,
            weight,
            entry_depth,
            phase: Phase::MarkSort,
            ranked: Vec::new(),
            wins: Vec::new(),
            unmarked: Vec::new(),
            pending: 0,
            boxes: Vec::new(),
        });
        self.subs.len() - 1
    }

    fn violation(&mut self, kind: InvariantKind, detail: String) {
        self.violations.push(Violation {
            turn: self.stats.turns,
            kind,
            detail,
        });
    }

    fn check_batch(&mut self, what: &str, count: usize, each: f64, trigger: f64) {
        if self.check && count as f64 * each > trigger / 2.0 * (1.0 + WEIGHT_EPS) {
            self.violation(
                InvariantKind::WeightRule,
                format!("{what}: {count} x {each:e} exceeds half of trigger weight {trigger:e}"),
            );
        }
    }

    fn place(&mut self, pos: usize, item: usize) {
        debug_assert_eq!(self.perm[pos], usize::MAX);
        self.perm[pos] = item;
        self.placed += 1;
    }

    /// Number of comparisons a fresh subproblem of `len` items activates.
    fn initial_comparisons(&self, len: usize) -> usize {
        if len <= 1 {
            0
        } else if len < self.threshold {
            pairs(len)
        } else {
            pairs(marked_count(len))
        }
    }

    fn start(&mut self, id: usize) -> Result<(), Error> {
        let n = self.subs[id].items.len();
        if n == 1 {
            let (pos, item) = (self.subs[id].offset, self.subs[id].items[0]);
            self.place(pos, item);
            self.finish(id);
            return Ok(());
        }
        let sub = &mut self.subs[id];
        if n < self.threshold {
            sub.phase = Phase::BaseCase;
            sub.ranked = std::mem::take(&mut sub.items);
        } else {
            sub.phase = Phase::MarkSort;
            let m = marked_count(n);
            // partial Fisher-Yates: the first m slots become the marked items
            for k in 0..m {
                let r = self.mark_rng.random_range(k..n);
                sub.items.swap(k, r);
            }
            sub.ranked = sub.items[..m].to_vec();
            sub.unmarked = sub.items[m..].to_vec();
        }
        let k = sub.ranked.len();
        sub.wins = vec![0; k];
        sub.pending = pairs(k);
        let (weight, depth) = (sub.weight, sub.entry_depth);
        if sub.pending == 0 {
            return self.on_sort_complete(id, weight);
        }
        for a in 0..k as u32 {
            for b in a + 1..k as u32 {
                self.activate(Kind::Pair { sub: id, a, b }, weight, depth);
            }
        }
        Ok(())
    }

    fn activate(&mut self, kind: Kind, weight: f64, depth: u32) {
        if self.check && weight < 0.25f64.powi(depth as i32) {
            self.violation(
                InvariantKind::WeightFloor,
                format!("weight {weight:e} below 4^-{depth} for {kind:?}"),
            );
        }
        let (i, j) = match kind {
            Kind::Pair { sub, a, b } => {
                let s = &self.subs[sub];
                (s.ranked[a as usize], s.ranked[b as usize])
            }
            Kind::Route { sub, item, node } => (item, self.subs[sub].ranked[node.pivot()]),
        };
        match self.problem.compare(i, j) {
            ComparisonForm::Constant(order) => self.instant.push(Settled {
                kind,
                order,
                weight,
                depth,
            }),
            ComparisonForm::Pivotal(form) => self.active.push(Active {
                form,
                weight,
                depth,
                kind,
            }),
        }
    }

    fn drain(&mut self) -> Result<(), Error> {
        while let Some(ev) = self.instant.pop() {
            self.on_settled(ev)?;
        }
        Ok(())
    }

    fn on_settled(&mut self, ev: Settled) -> Result<(), Error> {
        self.stats.comparisons_resolved += 1;
        match ev.kind {
            Kind::Pair { sub, a, b } => {
                let s = &mut self.subs[sub];
                match ev.order {
                    Order::FirstLow => s.wins[b as usize] += 1,
                    Order::FirstHigh => s.wins[a as usize] += 1,
                }
                s.pending -= 1;
                if s.pending == 0 {
                    self.on_sort_complete(sub, ev.weight)?;
                }
            }
            Kind::Route { sub, item, node } => match PivotTree::descend(node, ev.order) {
                Step::Node(next) => {
                    let w = match self.fault {
                        Some(Fault::UnhalvedRouting) => ev.weight,
                        None => ev.weight / 2.0,
                    };
                    self.check_batch("routing step", 1, w, ev.weight);
                    self.activate(Kind::Route { sub, item, node: next }, w, ev.depth + 1);
                }
                Step::Box(k) => {
                    let s = &mut self.subs[sub];
                    s.boxes[k].push(item);
                    s.pending -= 1;
                    if s.pending == 0 {
                        self.on_routing_complete(sub, ev.weight)?;
                    }
                }
            },
        }
        Ok(())
    }

    /// All pairs of the ranked set are resolved; `trigger` is the weight of the
    /// last one.
    fn on_sort_complete(&mut self, id: usize, trigger: f64) -> Result<(), Error> {
        let s = &mut self.subs[id];
        let k = s.ranked.len();
        let mut sorted = vec![usize::MAX; k];
        for (pos, &w) in s.wins.iter().enumerate() {
            let w = w as usize;
            if w >= k || sorted[w] != usize::MAX {
                return Err(Error::Intransitive { items: s.ranked.clone() });
            }
            sorted[w] = s.ranked[pos];
        }
        s.wins = Vec::new();
        if s.phase == Phase::BaseCase {
            let offset = s.offset;
            for (r, item) in sorted.into_iter().enumerate() {
                self.place(offset + r, item);
            }
            self.finish(id);
            return Ok(());
        }
        s.ranked = sorted;
        s.phase = Phase::Routing;
        let n = s.items.len();
        let unmarked = std::mem::take(&mut s.unmarked);
        s.boxes = vec![Vec::new(); k + 1];
        s.pending = unmarked.len();
        if unmarked.is_empty() {
            return self.on_routing_complete(id, trigger);
        }
        let weight = routing_weight(s.weight, n);
        let depth = routing_depth(s.entry_depth, n);
        self.check_batch("routing start", unmarked.len(), weight, trigger);
        let root = PivotTree::new(k).root();
        for item in unmarked {
            self.activate(Kind::Route { sub: id, item, node: root }, weight, depth);
        }
        Ok(())
    }

    /// Every unmarked item has reached its box; `trigger` is the weight of the
    /// last routing comparison.
    fn on_routing_complete(&mut self, id: usize, trigger: f64) -> Result<(), Error> {
        let s = &mut self.subs[id];
        let n = s.items.len();
        let m = s.ranked.len();
        let child_weight = child_weight(s.weight, n);
        let child_depth = child_depth(s.entry_depth, n, m);
        let boxes = std::mem::take(&mut s.boxes);
        let pivots = std::mem::take(&mut s.ranked);
        let mut pos = s.offset;
        let mut children = Vec::new();
        for (k, b) in boxes.into_iter().enumerate() {
            if !b.is_empty() {
                let len = b.len();
                children.push((b, pos));
                pos += len;
            }
            if let Some(&p) = pivots.get(k) {
                self.place(pos, p);
                pos += 1;
            }
        }
        self.finish(id);
        let activations: usize = children.iter().map(|(b, _)| self.initial_comparisons(b.len())).sum();
        self.check_batch("subproblem split", activations, child_weight, trigger);
        for (items, offset) in children {
            let child = self.new_sub(items, offset, child_weight, child_depth);
            self.start(child)?;
        }
        Ok(())
    }

    fn finish(&mut self, id: usize) {
        let s = &mut self.subs[id];
        s.phase = Phase::Done;
        s.items = Vec::new();
        s.ranked = Vec::new();
    }

    fn turn(&mut self) -> Result<(), Error> {
        self.stats.turns += 1;
        let turn = self.stats.turns;
        let total: f64 = self.active.iter().map(|a| a.weight).sum();
        self.stats.active_weight_trace.push((turn, total));

        let at = select_weighted_median(&mut self.active, |a| &a.form.root, |a| a.weight, &mut self.select_rng)
            .expect("turn with no active comparison");
        let rho = self.active[at].form.root.clone();
        let before = self.interval.clone();
        let calls = self.stats.oracle_calls;
        let problem = self.problem;
        let side = resolve_root(&rho, &mut self.interval, |l| problem.oracle(l), &mut self.stats)?;

        if self.check && self.stats.oracle_calls > calls {
            if !before.strictly_contains(&rho) {
                self.violation(
                    InvariantKind::OracleOutsideInterval,
                    format!("oracle called at {rho} outside {before}"),
                );
            }
            let mut decided = ExactSum::new();
            let mut inside = ExactSum::new();
            for a in &self.active {
                if side.transfer(&rho, &a.form.root).is_some() {
                    decided.add(a.weight);
                }
                if before.strictly_contains(&a.form.root) {
                    inside.add(a.weight);
                }
            }
            if decided.doubled_cmp(&inside) == std::cmp::Ordering::Less {
                self.violation(
                    InvariantKind::MedianSplit,
                    format!(
                        "decided weight {:e} < half of in-interval weight {:e} at root {rho}",
                        decided.value(),
                        inside.value()
                    ),
                );
            }
        }

        let mut settled = Vec::new();
        let pending = std::mem::take(&mut self.active);
        for a in pending {
            match side.transfer(&rho, &a.form.root) {
                Some(s) => settled.push(Settled {
                    order: apply_form(&ComparisonForm::Pivotal(a.form), s),
                    kind: a.kind,
                    weight: a.weight,
                    depth: a.depth,
                }),
                None => self.active.push(a),
            }
        }
        for ev in settled {
            self.on_settled(ev)?;
            self.drain()?;
        }

        if self.check && !self.interval.is_within(&before) {
            let now = self.interval.to_string();
            self.violation(InvariantKind::IntervalWidened, format!("{before} widened to {now}"));
        }
        Ok(())
    }
}
