use std::collections::HashMap;

use proptest::prelude::*;

use catmouse_core::circuit::{generate_random, parse_circuit, Assignment, Circuit, GenParams, NodeRef};
use catmouse_core::harness::{structural_violations, verify_equivalence, BuiltGame, Mode};
use catmouse_core::solver::{
    classify, solve, Board, GameInstance, GameState, Outcome, Player, Terminal,
};

fn gen_params() -> impl Strategy<Value = (GenParams, u64)> {
    (1u32..=3, 1usize..=4, 1usize..=5, 0usize..=4, any::<bool>(), any::<u64>()).prop_map(
        |(layers, width, num_inputs, p, fanout2, seed)| {
            (
                GenParams {
                    layers,
                    width,
                    num_inputs,
                    p_or: p as f64 / 4.0,
                    fanout2,
                },
                seed,
            )
        },
    )
}

fn circuit() -> impl Strategy<Value = Circuit> {
    gen_params().prop_filter_map("generator rejected params", |(p, seed)| {
        generate_random(&p, seed).ok()
    })
}

fn circuit_and_mask() -> impl Strategy<Value = (Circuit, u64)> {
    circuit().prop_flat_map(|c| {
        let k = c.num_inputs();
        (Just(c), 0u64..(1 << k))
    })
}

fn board() -> impl Strategy<Value = GameInstance> {
    (2usize..=6, any::<bool>(), prop::collection::vec(any::<bool>(), 36), 0usize..36, 0usize..36, 0usize..36)
        .prop_filter_map("starts collide", |(n, directed, edges, c, m, h)| {
            let (c, m, h) = (c % n, m % n, h % n);
            let mut b = Board::new((0..n).map(|i| format!("n{i}")).collect(), directed);
            for a in 0..n {
                for z in 0..n {
                    if a != z && edges[a * 6 + z] && (directed || a < z) {
                        b.add_edge(a, z);
                    }
                }
            }
            GameInstance::new(b, c, m, h).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_circuits_are_well_formed((p, seed) in gen_params()) {
        if let Ok(c) = generate_random(&p, seed) {
            prop_assert_eq!(c.depth(), p.layers);
            prop_assert_eq!(c.num_inputs(), p.num_inputs);
            prop_assert_eq!(generate_random(&p, seed).unwrap(), c.clone());
            if p.fanout2 {
                let mut uses: HashMap<NodeRef, usize> = HashMap::new();
                for g in c.gates() {
                    *uses.entry(g.left).or_default() += 1;
                    if g.right != g.left {
                        *uses.entry(g.right).or_default() += 1;
                    }
                }
                prop_assert!(uses.values().all(|&u| u <= 2));
            }
        }
    }

    #[test]
    fn serialize_parse_round_trip(c in circuit()) {
        let text = c.serialize();
        let back = parse_circuit(&text).unwrap();
        prop_assert_eq!(back.serialize(), text);
        prop_assert_eq!(back, c);
    }

    #[test]
    fn evaluation_is_monotone((c, mask) in circuit_and_mask(), bit in 0usize..8) {
        let k = c.num_inputs();
        let lo = Assignment::from_mask(mask & !(1 << (bit % k)), k);
        let hi = Assignment::from_mask(mask | (1 << (bit % k)), k);
        let (vlo, _) = c.evaluate(&lo).unwrap();
        let (vhi, _) = c.evaluate(&hi).unwrap();
        prop_assert!(!vlo || vhi);
    }

    #[test]
    fn reduction_matches_value((c, mask) in circuit_and_mask()) {
        let x = Assignment::from_mask(mask, c.num_inputs());
        let report = verify_equivalence(&c, &x, &Mode::BOTH).unwrap();
        prop_assert!(report.equivalence_ok, "{}", report);
        for mode in Mode::BOTH {
            let game = BuiltGame::new(&c, &x, mode).unwrap();
            let v = structural_violations(&game);
            prop_assert!(v.is_empty(), "{:?}", v);
        }
    }

    #[test]
    fn solution_is_locally_consistent(inst in board()) {
        let sol = solve(&inst);
        let n = inst.board().len();
        for cat in 0..n {
            for mouse in 0..n {
                for turn in [Player::Cat, Player::Mouse] {
                    let s = GameState { cat, mouse, turn };
                    let v = sol.value(&s).unwrap();
                    match classify(&s, &inst) {
                        Terminal::CatTerminal => prop_assert_eq!(v, Outcome::CatWin),
                        Terminal::MouseTerminal => prop_assert_eq!(v, Outcome::MouseWin),
                        Terminal::Open => {
                            let next: Vec<GameState> = inst
                                .board()
                                .successors(s.mover_position())
                                .map(|to| s.advance(to))
                                .collect();
                            let vals: Vec<Outcome> = next.iter().map(|t| sol.value(t).unwrap()).collect();
                            let win = turn.wins();
                            let expect = if vals.is_empty() {
                                turn.other().wins()
                            } else if vals.contains(&win) {
                                win
                            } else if vals.contains(&Outcome::Draw) {
                                Outcome::Draw
                            } else {
                                turn.other().wins()
                            };
                            prop_assert_eq!(v, expect, "{}", inst.describe(&s));
                            if v != Outcome::Draw && !vals.is_empty() {
                                let best = sol.best_move(&s).unwrap();
                                let after = s.advance(best);
                                prop_assert_eq!(sol.value(&after), Some(v));
                                prop_assert_eq!(sol.dist(&after).unwrap() + 1, sol.dist(&s).unwrap());
                            }
                        }
                    }
                }
            }
        }
    }
}
