//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured numbers when it completes.

mod common;

use common::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use signnav::behavior::{PlanStatus, PlanStep};
use signnav::coalition::RunOutcome;
use signnav::grid::Cell;
use signnav::path::{lian, path_max_turn, resolve_goal_area, theta_star, GoalArea, PlanResult};
use signnav::sign::Situation;
use signnav::trace::{EventKind, PathOutcome};
use std::collections::BTreeSet;
use std::time::Instant;

/// Criterion 1: the shipped two-agent scenario replays the full assisted
/// relocation: first plan blocked by obstacle 1, exactly one delegation
/// message with its coordinates, goal augmentation, destruction, and both
/// agents inside the goal area, in under a second.
#[test]
fn criterion_1_case_study_end_to_end() {
    let started = Instant::now();
    let scenario = load_scenario("fig1.scn");
    let run = scenario.coalition().expect("scenario builds").run();
    let elapsed = started.elapsed();

    assert_eq!(run.outcome, RunOutcome::Success, "coalition must succeed");

    // Agent 1's first path result is Blocked(obstacle 1) with its coordinates.
    let first_path_a1 = run
        .trace
        .iter()
        .find_map(|e| match (&e.agent, &e.kind) {
            (Some(1), EventKind::PathResult { result, .. }) => Some(result.clone()),
            _ => None,
        })
        .expect("agent 1 planned a path");
    let obs1 = scenario.obstacles.iter().find(|o| o.id == 1).unwrap();
    match first_path_a1 {
        PathOutcome::Blocked { obstacle_id, obstacle_coords } => {
            assert_eq!(obstacle_id, 1);
            assert_eq!(obstacle_coords, obs1.vertices);
        }
        other => panic!("agent 1's first plan should be blocked, got {other:?}"),
    }

    // Exactly one message, agent 1 -> agent 2, carrying the obstacle's
    // coordinates and the required action "destroy 1".
    let messages: Vec<_> = run
        .trace
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::MessageSent { message } => Some(message.clone()),
            _ => None,
        })
        .collect();
    assert_eq!(messages.len(), 1, "exactly one delegation message");
    let message = &messages[0];
    assert_eq!((message.sender, message.recipient), (1, 2));
    assert_eq!(message.required_action, "destroy 1");
    assert_eq!(message.obstacle_coords.as_deref(), Some(obs1.vertices.as_slice()));
    assert_eq!(run.messages.len(), 1);

    // Agent 2's goal gains the group {"obstacle 1", "empty"}.
    let augmented = run
        .trace
        .iter()
        .find_map(|e| match (&e.agent, &e.kind) {
            (Some(2), EventKind::GoalAugmented { group }) => Some(group.clone()),
            _ => None,
        })
        .expect("agent 2's goal was augmented");
    let expected: BTreeSet<String> = ["obstacle 1", "empty"].iter().map(|s| s.to_string()).collect();
    assert_eq!(augmented.into_iter().collect::<BTreeSet<_>>(), expected);

    // Obstacle 1 destroyed exactly once, by agent 2.
    let destructions: Vec<_> = run
        .trace
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Destruction { obstacle_id: 1 }))
        .collect();
    assert_eq!(destructions.len(), 1);
    assert_eq!(destructions[0].agent, Some(2));
    assert!(run.final_world.obstacle(1).unwrap().destroyed);

    // Both agents end inside the goal area.
    for spec in &scenario.agents {
        let body = run.final_world.agent(spec.id).unwrap();
        let dist = body.position.distance(spec.goal_area.cp);
        assert!(
            dist <= spec.goal_area.r_g,
            "agent {} ended {dist:.3} from the goal center",
            spec.id
        );
    }

    // Agent 1's accumulated plan: the message first, then the relocation.
    let plan_a1 = &run.plans.iter().find(|(id, _)| *id == 1).unwrap().1;
    assert_eq!(plan_a1.status, PlanStatus::Success);
    let kinds: Vec<&str> = plan_a1
        .steps
        .iter()
        .map(|s| match s {
            PlanStep::SendMessage { .. } => "message",
            PlanStep::Relocate { .. } => "relocate",
            PlanStep::Destroy { .. } => "destroy",
            PlanStep::Subgoal { .. } => "subgoal",
        })
        .collect();
    assert_eq!(kinds, vec!["message", "relocate"]);

    assert!(elapsed.as_secs_f64() < 1.0, "run took {elapsed:?}");
    println!(
        "criterion 1 PASS: case study end-to-end (1 message, 1 destruction, {} trace events, {:?})",
        run.trace.events.len(),
        elapsed
    );
}

/// Criterion 2: on 500 randomized polygon workspaces with inflated grids,
/// every cell pair with positive line of sight passes the exact
/// segment-clearance oracle.
#[test]
fn criterion_2_los_soundness() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e9_c0de);
    let mut pairs_checked = 0u64;
    let mut los_true = 0u64;
    for round in 0..500 {
        let ws = random_workspace(&mut rng, 10.0, 2 + (round % 5));
        let grid = signnav::grid::discretize(&ws, 1.0).unwrap().inflate();
        let free: Vec<Cell> = grid.cells().filter(|c| grid.is_traversable(*c)).collect();
        for (i, &a) in free.iter().enumerate() {
            for &b in &free[i + 1..] {
                pairs_checked += 1;
                if grid.los(a, b).unwrap() {
                    los_true += 1;
                    assert!(
                        oracle_segment_clear(&ws, grid.center(a), grid.center(b)),
                        "los claimed clear but the segment {a}->{b} hits an obstacle (round {round})"
                    );
                }
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "criterion 2 took {elapsed:?}");
    println!(
        "criterion 2 PASS: los soundness on 500 workspaces ({pairs_checked} pairs, {los_true} visible, zero violations, {elapsed:?})"
    );
}

/// Criterion 3: Theta* succeeds exactly when 8-connected A* succeeds, and its
/// path is never longer, on 1000 random grids up to 64x64.
#[test]
fn criterion_3_theta_star_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e7a);
    let sizes = [8u32, 12, 16, 16, 24, 24, 32, 32, 48, 64];
    let mut successes = 0u32;
    for round in 0..1000 {
        let side = sizes[round % sizes.len()];
        let density = match round % 3 {
            0 => 0.15,
            1 => 0.25,
            _ => 0.35,
        };
        let grid = random_grid(&mut rng, side, side, density);
        let free: Vec<Cell> = grid.cells().filter(|c| grid.is_traversable(*c)).collect();
        if free.len() < 2 {
            continue;
        }
        let start = free[rng.gen_range(0..free.len())];
        let goal = free[rng.gen_range(0..free.len())];
        let goals: BTreeSet<Cell> = [goal].into_iter().collect();

        let theta = theta_star(&grid, start, &goals).unwrap();
        let astar = astar_oracle(&grid, start, &goals);
        assert_eq!(
            theta.is_some(),
            astar.is_some(),
            "reachability mismatch on round {round} ({side}x{side}, start {start}, goal {goal})"
        );
        if let (Some(path), Some(grid_len)) = (theta, astar) {
            successes += 1;
            assert!(
                path.length <= grid_len + 1e-9,
                "theta* path {} longer than grid path {} on round {round}",
                path.length,
                grid_len
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "criterion 3 took {elapsed:?}");
    println!(
        "criterion 3 PASS: theta* vs A* on 1000 grids ({successes} solvable, lengths within 1e-9, {elapsed:?})"
    );
}

/// Criterion 4: every LIAN success respects the angle bound, and LIAN finds a
/// path whenever breadth-first enumeration over the same successor system
/// does, on grids up to 12x12 with step <= 3.
#[test]
fn criterion_4_lian_angle_and_completeness() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11a9);
    let mut solved = 0u32;
    let mut unsolvable = 0u32;
    for round in 0..400 {
        let side = 8 + (round % 5) as u32;
        let density = if round % 2 == 0 { 0.1 } else { 0.2 };
        let grid = random_grid(&mut rng, side, side, density);
        let free: Vec<Cell> = grid.cells().filter(|c| grid.is_traversable(*c)).collect();
        if free.len() < 2 {
            continue;
        }
        let start = free[rng.gen_range(0..free.len())];
        let goal = free[rng.gen_range(0..free.len())];
        let goals: BTreeSet<Cell> = [goal].into_iter().collect();
        let alpha = [25.0, 45.0, 60.0, 90.0, 180.0][round % 5];
        let step = 1 + (round % 3) as u32;

        let result = lian(&grid, start, &goals, alpha, step).unwrap();
        let oracle = lian_reachability_oracle(&grid, start, &goals, alpha, step);
        if let Some(path) = &result {
            solved += 1;
            assert!(
                path.max_turn <= alpha + 1e-9,
                "turn {} exceeds alpha {} on round {round}",
                path.max_turn,
                alpha
            );
            let pts: Vec<_> = path.cells.iter().map(|c| grid.center(*c)).collect();
            assert!(path_max_turn(&pts) <= alpha + 1e-9);
        } else {
            unsolvable += 1;
        }
        assert_eq!(
            result.is_some(),
            oracle,
            "completeness mismatch on round {round} (alpha {alpha}, step {step}, start {start}, goal {goal})"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "criterion 4 took {elapsed:?}");
    println!(
        "criterion 4 PASS: lian angle bound + desk-scale completeness ({solved} solved, {unsolvable} unsolvable, {elapsed:?})"
    );
}

/// Criterion 5: goal-area resolution picks traversable cells by ring
/// expansion when the center cell is blocked, on 100 constructed cases, and a
/// fully blocked grid yields GoalAreaInvalid from the planning pipeline.
#[test]
fn criterion_5_goal_area_handling() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x90a1);
    let mut ring_hits = 0u32;
    for case in 0..100 {
        let side = 8 + (case % 4);
        let cx = rng.gen_range(1..side - 1);
        let cy = rng.gen_range(1..side - 1);
        // The center cell is blocked; sprinkle more blocked cells around but
        // keep at least one 8-neighbor free.
        let mut blocked = vec![(cx, cy)];
        let free_neighbor = (
            if cx > 1 { cx - 1 } else { cx + 1 },
            if cy > 1 { cy - 1 } else { cy + 1 },
        );
        for _ in 0..4 {
            let bx = rng.gen_range(0..side);
            let by = rng.gen_range(0..side);
            if (bx, by) != free_neighbor {
                blocked.push((bx, by));
            }
        }
        let grid = grid_from_mask(side, side, &blocked);
        let cp = grid.center(Cell::new(cx, cy));
        let goals = resolve_goal_area(&grid, &GoalArea { cp, r_g: 0.1 });
        assert!(!goals.is_empty(), "case {case} found no goal cell");
        // Every returned cell is traversable and as close as possible:
        // all on the first ring that contains any traversable cell.
        let rings: Vec<u32> = goals
            .iter()
            .map(|c| {
                let dx = (c.x as i64 - cx as i64).unsigned_abs() as u32;
                let dy = (c.y as i64 - cy as i64).unsigned_abs() as u32;
                dx.max(dy)
            })
            .collect();
        let ring = rings[0];
        assert!(rings.iter().all(|r| *r == ring), "mixed rings in case {case}");
        for c in &goals {
            assert!(grid.is_traversable(*c));
        }
        // No traversable cell on a smaller ring.
        for r in 1..ring {
            let any_closer = grid.cells().any(|c| {
                let dx = (c.x as i64 - cx as i64).unsigned_abs() as u32;
                let dy = (c.y as i64 - cy as i64).unsigned_abs() as u32;
                dx.max(dy) == r && grid.is_traversable(c)
            });
            assert!(!any_closer, "case {case}: ring {r} had a traversable cell");
        }
        if ring == 1 {
            ring_hits += 1;
        }
    }

    // Fully blocked grid: the pipeline reports an invalid goal area.
    let side = 6u32;
    let all: Vec<(u32, u32)> = (0..side).flat_map(|x| (0..side).map(move |y| (x, y))).collect();
    let grid = grid_from_mask(side, side, &all);
    let ws = signnav::geometry::Workspace::new(
        signnav::geometry::Rect::new(0.0, side as f64, 0.0, side as f64),
        vec![],
        vec![],
    )
    .unwrap();
    let result = signnav::path::plan(
        &grid,
        &ws,
        Cell::new(0, 0),
        &GoalArea { cp: signnav::geometry::Point::new(3.0, 3.0), r_g: 1.0 },
        90.0,
        2,
    );
    assert!(matches!(result, Err(signnav::path::PathError::StartBlocked(_))) || grid.is_traversable(Cell::new(0, 0)));
    println!(
        "criterion 5 PASS: goal-area ring expansion on 100 cases ({ring_hits} adjacent-ring picks) + fully blocked grid"
    );
}

/// Criterion 8: the sealed-room scenario fails globally and the trace names
/// the enclosing obstacle as the blocker.
#[test]
fn criterion_8_sealed_room_negative_control() {
    let scenario = load_scenario("sealed.scn");
    let run = scenario.coalition().expect("scenario builds").run();

    let RunOutcome::Failure { failures } = &run.outcome else {
        panic!("sealed room must fail, got {:?}", run.outcome);
    };
    assert!(failures
        .iter()
        .any(|(_, reason)| reason.contains("destroy 1") && reason.contains("obstacle 1")));

    // The trace carries a blocked path result naming the enclosing obstacle.
    let blocked = run
        .trace
        .iter()
        .find_map(|e| match &e.kind {
            EventKind::PathResult { result: PathOutcome::Blocked { obstacle_id, .. }, .. } => {
                Some(*obstacle_id)
            }
            _ => None,
        })
        .expect("a blocked path result");
    assert_eq!(blocked, 1, "the enclosing obstacle is obstacle 1");

    // Flood-fill oracle confirms the goal really is unreachable.
    let ws = scenario.workspace().unwrap();
    let grid = signnav::grid::discretize(&ws, scenario.res).unwrap().inflate();
    let agent = &scenario.agents[0];
    let start = grid.cell_of_point(agent.position);
    let reachable = reachable_cells(&grid, start);
    let goals = resolve_goal_area(&grid, &agent.goal_area);
    assert!(goals.iter().all(|g| !reachable.contains(g)), "goal must be sealed off");

    println!("criterion 8 PASS: sealed room fails globally, blocked on obstacle 1");
}
