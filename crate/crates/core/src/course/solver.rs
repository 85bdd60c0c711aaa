use alloc::vec;
use alloc::vec::Vec;

use super::types::{AssignmentPlan, CourseInstance};
use crate::{Error, Result};

/// Largest `rooms^sections` space [`brute_force_solve`] will enumerate.
pub const BRUTE_FORCE_GUARD: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Solved(AssignmentPlan, i64),
    Unsatisfiable,
    /// The node budget ran out before the search finished.
    LimitReached,
}

/// Minimum-slack feasible assignment, or `Unsatisfiable`.
pub fn solve_exact(instance: &CourseInstance) -> Result<(AssignmentPlan, i64)> {
    match solve_with_limit(instance, None) {
        SearchOutcome::Solved(plan, slack) => Ok((plan, slack)),
        SearchOutcome::Unsatisfiable => Err(Error::Unsatisfiable),
        SearchOutcome::LimitReached => unreachable!("no node limit was set"),
    }
}

struct Search<'a> {
    order: Vec<usize>,
    /// Rooms that fit each section, by increasing slack then room index.
    choices: &'a [Vec<(usize, i64)>],
    /// Sum of the cheapest choices of `order[pos..]`.
    suffix_bound: Vec<i64>,
    /// Sections whose slot overlaps each section's slot.
    clashes: &'a [Vec<usize>],
    room_of: Vec<Option<usize>>,
    best: Option<(Vec<Option<usize>>, i64)>,
    nodes: u64,
    limit: Option<u64>,
    aborted: bool,
}

impl Search<'_> {
    fn dfs(&mut self, pos: usize, slack: i64) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.limit.is_some_and(|l| self.nodes > l) {
            self.aborted = true;
            return;
        }
        if let Some((_, best)) = &self.best {
            if slack + self.suffix_bound[pos] >= *best {
                return;
            }
        }
        if pos == self.order.len() {
            self.best = Some((self.room_of.clone(), slack));
            return;
        }
        let s = self.order[pos];
        for &(room, cost) in &self.choices[s] {
            if self.clashes[s].iter().any(|&t| self.room_of[t] == Some(room)) {
                continue;
            }
            self.room_of[s] = Some(room);
            self.dfs(pos + 1, slack + cost);
            self.room_of[s] = None;
            // Nothing beats the relaxation bound.
            if self.best.as_ref().is_some_and(|(_, b)| *b == self.suffix_bound[0]) {
                return;
            }
        }
    }
}

/// Groups sections into connected components of the overlap graph. Each
/// component lists its sections in increasing index order.
fn components(clashes: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut label = vec![usize::MAX; clashes.len()];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for root in 0..clashes.len() {
        if label[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![root];
        label[root] = id;
        let mut next = 0;
        while next < members.len() {
            for &t in &clashes[members[next]] {
                if label[t] == usize::MAX {
                    label[t] = id;
                    members.push(t);
                }
            }
            next += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Branch and bound over sections by decreasing enrollment, trying rooms by
/// increasing slack. The bound is the current slack plus each remaining
/// section's cheapest fitting room. Sections that share no overlapping slot
/// never constrain each other, so each component of the overlap graph is
/// searched on its own. `limit` caps the total number of search nodes.
pub fn solve_with_limit(instance: &CourseInstance, limit: Option<u64>) -> SearchOutcome {
    let sections = &instance.sections;
    let rooms = &instance.classrooms;
    let m = sections.len();

    let mut choices = Vec::with_capacity(m);
    for s in sections {
        let mut c: Vec<(usize, i64)> = rooms
            .iter()
            .enumerate()
            .filter(|(_, r)| r.capacity >= s.enrollment)
            .map(|(i, r)| (i, i64::from(r.capacity) - i64::from(s.enrollment)))
            .collect();
        if c.is_empty() {
            return SearchOutcome::Unsatisfiable;
        }
        c.sort_by_key(|&(i, cost)| (cost, i));
        choices.push(c);
    }
    let clashes: Vec<Vec<usize>> = (0..m)
        .map(|a| {
            (0..m)
                .filter(|&b| b != a && sections[a].slot.overlaps(&sections[b].slot))
                .collect()
        })
        .collect();

    let mut plan = AssignmentPlan::default();
    let mut total = 0i64;
    let mut nodes = 0u64;
    for mut order in components(&clashes) {
        order.sort_by(|&a, &b| sections[b].enrollment.cmp(&sections[a].enrollment).then(a.cmp(&b)));
        let mut suffix_bound = vec![0i64; order.len() + 1];
        for pos in (0..order.len()).rev() {
            suffix_bound[pos] = suffix_bound[pos + 1] + choices[order[pos]][0].1;
        }
        let mut search = Search {
            order,
            choices: &choices,
            suffix_bound,
            clashes: &clashes,
            room_of: vec![None; m],
            best: None,
            nodes,
            limit,
            aborted: false,
        };
        search.dfs(0, 0);
        if search.aborted {
            return SearchOutcome::LimitReached;
        }
        nodes = search.nodes;
        let Some((rooms, slack)) = search.best else {
            return SearchOutcome::Unsatisfiable;
        };
        for (s, r) in rooms.into_iter().enumerate() {
            if let Some(r) = r {
                plan.assign(s, r);
            }
        }
        total += slack;
    }
    SearchOutcome::Solved(plan, total)
}

/// Enumerates every room assignment and keeps the first one (in odometer
/// order, section 0 most significant) with the smallest slack among feasible
/// ones. Independent of [`solve_exact`]; intended as its test oracle.
pub fn brute_force_solve(instance: &CourseInstance) -> Result<(AssignmentPlan, i64)> {
    let m = instance.sections.len();
    let n = instance.classrooms.len();
    let space = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if space > BRUTE_FORCE_GUARD {
        return Err(Error::TooLarge { space });
    }
    if n == 0 {
        return if m == 0 { Ok((AssignmentPlan::default(), 0)) } else { Err(Error::Unsatisfiable) };
    }
    let enroll: Vec<i64> = instance.sections.iter().map(|s| i64::from(s.enrollment)).collect();
    let cap: Vec<i64> = instance.classrooms.iter().map(|c| i64::from(c.capacity)).collect();
    let mut clash = vec![false; m * m];
    for a in 0..m {
        for b in 0..m {
            clash[a * m + b] = a != b && instance.sections[a].slot.overlaps(&instance.sections[b].slot);
        }
    }

    let mut rooms = vec![0usize; m];
    let mut best: Option<(Vec<usize>, i64)> = None;
    loop {
        let mut ok = true;
        let mut slack = 0i64;
        'check: for a in 0..m {
            if enroll[a] > cap[rooms[a]] {
                ok = false;
                break;
            }
            slack += cap[rooms[a]] - enroll[a];
            for b in a + 1..m {
                if rooms[a] == rooms[b] && clash[a * m + b] {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok && best.as_ref().map_or(true, |(_, b)| slack < *b) {
            best = Some((rooms.clone(), slack));
        }
        // Advance the odometer; the last section varies fastest.
        let mut i = m;
        loop {
            if i == 0 {
                return best
                    .map(|(r, s)| (AssignmentPlan::from_rooms(&r), s))
                    .ok_or(Error::Unsatisfiable);
            }
            i -= 1;
            rooms[i] += 1;
            if rooms[i] < n {
                break;
            }
            rooms[i] = 0;
        }
    }
}
