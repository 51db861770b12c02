use kifsim::fragments::shipped_kb;
use kifsim::{Microworld, WorldError};
use proptest::prelude::*;

const REGIONS: [&str; 3] = ["north", "south", "east"];

#[derive(Debug, Clone)]
enum Op {
    Assemble(usize, usize),
    Move(usize, usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0usize..8, 0usize..8).prop_map(|(w, p)| Op::Assemble(w, p)),
        (0usize..8, 0usize..3).prop_map(|(e, r)| Op::Move(e, r)),
    ]
}

fn name(i: usize) -> String {
    format!("part{i}")
}

/// Every part sits in the same region as the whole it belongs to.
fn coherent(w: &Microworld) -> bool {
    w.assemblies()
        .iter()
        .all(|(whole, parts)| parts.iter().all(|p| w.region_of(p.as_str()) == w.region_of(whole.as_str())))
}

proptest! {
    #[test]
    fn parts_travel_with_their_whole(ops in prop::collection::vec(op(), 0..40)) {
        let kb = shipped_kb().unwrap();
        let mut w = Microworld::new("regions");
        for r in REGIONS {
            w.add_region(r);
        }
        for i in 0..8 {
            w.instantiate("Device", &name(i), REGIONS[i % 3], &kb).unwrap();
        }
        for o in ops {
            match o {
                Op::Assemble(whole, part) => match w.add_assembly(&name(whole), &[name(part).as_str()]) {
                    Ok(()) => {}
                    Err(WorldError::InvalidAssembly { .. }) => {}
                    Err(e) => prop_assert!(false, "{e}"),
                },
                Op::Move(e, r) => w.move_entity(&name(e), REGIONS[r]).unwrap(),
            }
            prop_assert!(coherent(&w));
            for whole in w.assemblies().keys() {
                prop_assert!(!w.transitive_parts(whole.as_str()).contains(whole));
            }
        }
    }
}

#[test]
fn unknown_region_is_rejected() {
    let kb = shipped_kb().unwrap();
    let mut w = Microworld::new("w");
    w.add_region("here");
    w.instantiate("Device", "d", "here", &kb).unwrap();
    assert!(matches!(w.move_entity("d", "there"), Err(WorldError::UnknownRegion(_))));
    assert!(matches!(
        w.instantiate("Device", "e", "there", &kb),
        Err(WorldError::UnknownRegion(_))
    ));
}
