use bionet_core::netmodel::{build, s_max};
use bionet_core::{ArchParams, ArchitectureSpace, NetConfig};

mod oracles;
use oracles::oracle_params;

fn arch(b: u8, x: u8, z: u8) -> ArchParams {
    ArchParams::new(b, x, z).unwrap()
}

#[test]
fn hand_enumerated_examples() {
    let cfg = NetConfig::default();
    for (a, params) in [
        (arch(0, 1, 4), 3842),
        (arch(1, 1, 4), 36_930),
        (arch(5, 2, 6), 751_970),
    ] {
        let n = build(&a, &cfg).unwrap();
        assert_eq!(n.param_count, params, "{a}");
        assert_eq!(
            oracle_params(
                a.blocks().into(),
                a.filter_interval().into(),
                a.lstm_exp().into(),
                2
            ),
            params
        );
        assert_eq!(n.storage_bytes, 4 * params);
    }
}

#[test]
fn oracle_agrees_on_whole_space() {
    for classes in [2u64, 3, 4] {
        let cfg = NetConfig::with_classes(classes as usize);
        for a in &ArchitectureSpace::enumerate() {
            let expected = oracle_params(
                a.blocks().into(),
                a.filter_interval().into(),
                a.lstm_exp().into(),
                classes,
            );
            let n = build(a, &cfg).unwrap();
            assert_eq!(n.param_count, expected, "{a} C={classes}");
            assert_eq!(n.storage_bytes, 4 * expected);
            assert!(n.shapes_chain());
        }
    }
}

#[test]
fn monotone_in_blocks_and_lstm() {
    let cfg = NetConfig::default();
    let p = |b, x, z| build(&arch(b, x, z), &cfg).unwrap();
    for x in 1..=4 {
        for z in 4..=8 {
            for b in 0..15 {
                assert!(p(b + 1, x, z).param_count > p(b, x, z).param_count);
                assert!(p(b + 1, x, z).flops > p(b, x, z).flops);
            }
        }
        for b in 0..=15 {
            for z in 4..8 {
                assert!(p(b, x, z + 1).param_count >= p(b, x, z).param_count);
                assert!(p(b, x, z + 1).flops >= p(b, x, z).flops);
            }
        }
    }
}

#[test]
fn s_max_is_deepest_fastest_growth() {
    let cfg = NetConfig::default();
    let space = ArchitectureSpace::enumerate();
    assert_eq!(
        s_max(&space, &cfg).unwrap(),
        build(&arch(15, 1, 8), &cfg).unwrap().storage_bytes
    );
}
