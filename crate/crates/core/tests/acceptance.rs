//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use catmouse_core::circuit::{parse_circuit, Assignment};
use catmouse_core::harness::{
    assignments_for, fuzz_corpus, fuzz_equivalence, proof_matches, structural_violations,
    targeted_undirected_checks, BuiltGame, CorpusEntry, FuzzParams, Mode, ProbeKind,
};
use catmouse_core::reduction::{export_graph, import_graph, ExportFormat};
use catmouse_core::solver::{minimax_oracle, outcome, solve, Board, GameInstance, GameState, Outcome, Player};

const CORPUS_SEED: u64 = 20240611;
const CORPUS_SIZE: usize = 200;

struct Line {
    id: u32,
    ok: bool,
    detail: String,
}

fn build_corpus() -> Vec<CorpusEntry> {
    let params = FuzzParams {
        max_layers: 4,
        max_width: 6,
        max_inputs: 6,
        p_or: None,
        fanout2: false,
        modes: Mode::BOTH.to_vec(),
    };
    fuzz_corpus(&params, CORPUS_SEED, CORPUS_SIZE).expect("generator accepts desk-scale params")
}

#[derive(Default)]
struct EntryResult {
    pairs: usize,
    mismatches: Vec<String>,
    draws: usize,
    structure: Vec<String>,
    proof: Vec<String>,
    script_errors: usize,
    roundtrip: Vec<String>,
}

fn check_entry(entry: &CorpusEntry) -> EntryResult {
    let mut r = EntryResult::default();
    let c = &entry.circuit;
    match parse_circuit(&c.serialize()) {
        Ok(back) if &back == c => {}
        _ => r.roundtrip.push(format!("circuit #{} does not round-trip", entry.index)),
    }
    for x in assignments_for(c, entry.seed) {
        for mode in Mode::BOTH {
            let tag = format!("#{} x={} {mode}", entry.index, x);
            let game = match BuiltGame::new(c, &x, mode) {
                Ok(g) => Arc::new(g),
                Err(e) => {
                    r.mismatches.push(format!("{tag}: {e}"));
                    continue;
                }
            };
            r.pairs += 1;
            let got = game.outcome();
            if got == Outcome::Draw {
                r.draws += 1;
            }
            if got != game.expected_outcome() {
                r.mismatches.push(format!("{tag}: value {} outcome {got}", game.value as u8));
            }
            for v in structural_violations(&game) {
                r.structure.push(format!("{tag}: {v}"));
            }
            let proof = proof_matches(&game);
            r.script_errors += proof.script_errors;
            r.proof.extend(proof.failures.into_iter().map(|f| format!("{tag}: {f}")));

            let text = export_graph(&game.graph, &game.map, ExportFormat::Structured);
            match import_graph(&text) {
                Ok((g2, m2)) if export_graph(&g2, &m2, ExportFormat::Structured) == text => {
                    match GameInstance::from_game_graph(&g2) {
                        Ok(inst) if outcome(&inst) == got => {}
                        _ => r.roundtrip.push(format!("{tag}: re-imported graph solves differently")),
                    }
                }
                Ok(_) => r.roundtrip.push(format!("{tag}: structured export not stable")),
                Err(e) => r.roundtrip.push(format!("{tag}: import failed: {e}")),
            }
        }
    }
    r
}

fn first(v: &[String]) -> String {
    v.first().cloned().unwrap_or_default()
}

fn random_instance(rng: &mut ChaCha8Rng) -> GameInstance {
    let n = rng.gen_range(3..=7);
    let directed = rng.gen_bool(0.5);
    let density = rng.gen_range(0.15..0.6);
    let names = (0..n).map(|i| format!("v{i}")).collect();
    let mut board = Board::new(names, directed);
    for a in 0..n {
        for b in 0..n {
            let considered = if directed { a != b } else { a < b };
            if considered && rng.gen_bool(density) {
                board.add_edge(a, b);
            }
        }
    }
    let hole = rng.gen_range(0..n);
    let mouse = loop {
        let m = rng.gen_range(0..n);
        if m != hole {
            break m;
        }
    };
    let cat = loop {
        let c = rng.gen_range(0..n);
        if c != mouse {
            break c;
        }
    };
    GameInstance::new(board, cat, mouse, hole).expect("distinct starts")
}

fn hand_built() -> Vec<(&'static str, GameInstance, Outcome)> {
    let board = |names: &[&str], directed: bool, edges: &[(usize, usize)]| {
        let mut b = Board::new(names.iter().map(|s| s.to_string()).collect(), directed);
        for &(a, c) in edges {
            b.add_edge(a, c);
        }
        b
    };
    vec![
        (
            // Both can step onto h; Cat gets there first and waits.
            "capture at h",
            GameInstance::new(board(&["c", "m", "h"], true, &[(0, 2), (1, 2), (2, 0)]), 0, 1, 2).unwrap(),
            Outcome::CatWin,
        ),
        (
            "stuck Cat",
            GameInstance::new(board(&["c", "m", "x", "h"], true, &[(1, 2), (2, 3)]), 0, 1, 3).unwrap(),
            Outcome::MouseWin,
        ),
        (
            "stuck Mouse",
            GameInstance::new(board(&["c", "x", "m", "h"], true, &[(0, 1), (1, 0)]), 0, 2, 3).unwrap(),
            Outcome::CatWin,
        ),
        (
            "4-cycle draw",
            GameInstance::new(
                board(&["a", "b", "c", "d", "h"], false, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
                0,
                2,
                4,
            )
            .unwrap(),
            Outcome::Draw,
        ),
    ]
}

fn criterion_2() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut count = BTreeMap::new();
    let mut bad = Vec::new();
    let mut checked = 0;
    while checked < 150 {
        let inst = random_instance(&mut rng);
        let oracle = minimax_oracle(&inst).expect("at most 7 nodes");
        let solved = solve(&inst);
        if solved.outcome() != oracle || outcome(&inst) != oracle {
            bad.push(format!("graph #{checked}: solve {} oracle {oracle}", solved.outcome()));
        }
        let key = (inst.board().is_directed(), oracle);
        *count.entry(key).or_insert(0usize) += 1;
        checked += 1;
    }
    for (name, inst, want) in hand_built() {
        let oracle = minimax_oracle(&inst).unwrap();
        let got = solve(&inst).outcome();
        if got != want || oracle != want {
            bad.push(format!("{name}: solve {got} oracle {oracle} expected {want}"));
        }
    }
    // Per-state values on a smaller sample, not just the initial state.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut states = 0;
    for _ in 0..20 {
        let inst = random_instance(&mut rng);
        let sol = solve(&inst);
        let n = inst.board().len();
        for cat in 0..n {
            for mouse in 0..n {
                if mouse == inst.hole {
                    continue;
                }
                for turn in [Player::Cat, Player::Mouse] {
                    let s = GameState { cat, mouse, turn };
                    let oracle = catmouse_core::solver::minimax_value(&inst, &s).unwrap();
                    states += 1;
                    if sol.value(&s) != Some(oracle) {
                        bad.push(format!("state {}: solve {:?} oracle {oracle}", inst.describe(&s), sol.value(&s)));
                    }
                }
            }
        }
    }
    let mix: Vec<String> = count
        .iter()
        .map(|((d, o), k)| format!("{}/{o}={k}", if *d { "dir" } else { "undir" }))
        .collect();
    Line {
        id: 2,
        ok: bad.is_empty(),
        detail: format!(
            "{checked} random graphs + 4 edge cases + {states} states; {} mismatches [{}] {}",
            bad.len(),
            mix.join(" "),
            first(&bad)
        ),
    }
}

fn criterion_5(corpus: &[CorpusEntry]) -> Line {
    // One true and one false assignment per circuit, first found.
    let picks: Vec<(usize, Assignment)> = corpus
        .iter()
        .flat_map(|e| {
            let xs = assignments_for(&e.circuit, e.seed);
            let mut out = Vec::new();
            for want in [true, false] {
                if let Some(x) = xs
                    .iter()
                    .find(|x| e.circuit.evaluate(x).map(|(v, _)| v) == Ok(want))
                {
                    out.push((e.index, x.clone()));
                }
            }
            out
        })
        .collect();
    let reports: Vec<_> = picks
        .par_iter()
        .map(|(i, x)| (*i, x.clone(), targeted_undirected_checks(&corpus[*i].circuit, x)))
        .collect();
    let mut instances: BTreeMap<ProbeKind, usize> = BTreeMap::new();
    let mut bad = Vec::new();
    for (i, x, report) in reports {
        match report {
            Ok(report) => {
                for kind in ProbeKind::ALL {
                    if report.of_kind(kind).next().is_some() {
                        *instances.entry(kind).or_default() += 1;
                    }
                }
                for p in report.results.iter().filter(|p| !p.ok) {
                    bad.push(format!(
                        "#{i} x={x} {} at ply {}: {} {} after {} plies",
                        p.kind.name(),
                        p.deviation_ply,
                        p.result,
                        p.reason,
                        p.plies
                    ));
                }
                bad.extend(report.errors.iter().map(|e| format!("#{i} x={x}: {e}")));
            }
            Err(e) => bad.push(format!("#{i} x={x}: {e}")),
        }
    }
    let enough = ProbeKind::ALL
        .iter()
        .all(|k| instances.get(k).copied().unwrap_or(0) >= 10);
    let counts: Vec<String> = ProbeKind::ALL
        .iter()
        .map(|k| format!("{}={}", k.name(), instances.get(k).copied().unwrap_or(0)))
        .collect();
    Line {
        id: 5,
        ok: enough && bad.is_empty(),
        detail: format!(
            "instances per probe [{}]; {} failed probes {}",
            counts.join(" "),
            bad.len(),
            first(&bad)
        ),
    }
}

fn criterion_6(corpus: &[CorpusEntry], roundtrip: &[String]) -> Line {
    let params = FuzzParams::default();
    let a = fuzz_equivalence(&params, 1, 50).unwrap().to_string();
    let b = fuzz_equivalence(&params, 1, 50).unwrap().to_string();
    let again = build_corpus();
    let same_corpus = again.len() == corpus.len()
        && again
            .iter()
            .zip(corpus)
            .all(|(x, y)| x.circuit.serialize() == y.circuit.serialize());
    let stable = a == b;
    Line {
        id: 6,
        ok: stable && same_corpus && roundtrip.is_empty(),
        detail: format!(
            "fuzz rerun identical: {stable}; corpus regenerated identically: {same_corpus}; {} round-trip failures {}",
            roundtrip.len(),
            first(roundtrip)
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let corpus = build_corpus();
    let results: Vec<EntryResult> = corpus.par_iter().map(check_entry).collect();
    let elapsed = start.elapsed();

    let pairs: usize = results.iter().map(|r| r.pairs).sum();
    let collect = |f: fn(&EntryResult) -> &Vec<String>| -> Vec<String> {
        results.iter().flat_map(|r| f(r).iter().cloned()).collect()
    };
    let mismatches = collect(|r| &r.mismatches);
    let draws: usize = results.iter().map(|r| r.draws).sum();
    let structure = collect(|r| &r.structure);
    let proof = collect(|r| &r.proof);
    let script_errors: usize = results.iter().map(|r| r.script_errors).sum();
    let roundtrip = collect(|r| &r.roundtrip);

    let mut lines = vec![Line {
        id: 1,
        ok: mismatches.is_empty() && draws == 0 && elapsed.as_secs() < 300,
        detail: format!(
            "{} circuits, {pairs} (circuit, assignment, mode) instances, {} mismatches, {draws} draws, {:.1}s {}",
            corpus.len(),
            mismatches.len(),
            elapsed.as_secs_f64(),
            first(&mismatches)
        ),
    }];
    lines.push(criterion_2());
    lines.push(Line {
        id: 3,
        ok: structure.is_empty(),
        detail: format!("{pairs} instances, {} violations {}", structure.len(), first(&structure)),
    });
    lines.push(Line {
        id: 4,
        ok: proof.is_empty() && script_errors == 0,
        detail: format!(
            "{pairs} instances, {} failed matches, {script_errors} NoMove/NoSafeMove {}",
            proof.len(),
            first(&proof)
        ),
    });
    lines.push(criterion_5(&corpus));
    lines.push(criterion_6(&corpus, &roundtrip));

    let mut failed = 0;
    for l in &lines {
        println!("criterion {}: {} - {}", l.id, if l.ok { "PASS" } else { "FAIL" }, l.detail.trim_end());
        if !l.ok {
            failed += 1;
        }
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
