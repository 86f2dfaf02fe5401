//! End-to-end checks of the symbolic layer through the public API.

use gpam_algebra::{
    check_identities, enumerate_basis, gamma_matrix, parse_symbol, renorm_matrix, Character,
    GammaMatrix, RenormMap, Structure, StructureParams, Symbol,
};

fn sym(s: &str) -> Symbol {
    parse_symbol(s).unwrap()
}

#[test]
fn public_surface_round_trip() {
    let params = StructureParams::default();
    let basis = enumerate_basis(Structure::Extended, &params);
    assert_eq!(basis.len(), 15);
    assert_eq!(basis.index_of(&sym("I(H)*Xi")), Some(4));

    let f = Character::new(0.5, -1.5, 2.0, 0.25);
    let m = gamma_matrix(&f, &basis);
    assert_eq!(m.n(), 15);
    assert_eq!(
        m.get(
            basis.index_of(&sym("Xi")).unwrap(),
            basis.index_of(&sym("I(H)*Xi")).unwrap()
        ),
        -1.5
    );
}

#[test]
fn identity_suite_is_green() {
    let params = StructureParams::default();
    let checks = check_identities(&params);
    let failures: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
    assert!(failures.is_empty(), "failed identities: {failures:?}");
}

#[test]
fn renormalized_reexpansion_interplay() {
    // the subtraction map commutes with every reexpansion map, because the
    // unit and the singular product reexpand over disjoint lower terms
    let params = StructureParams::default();
    let basis = enumerate_basis(Structure::Base, &params);
    let f = Character::new(1.25, 0.0, -0.5, 3.0);
    let g = gamma_matrix(&f, &basis);
    let m = renorm_matrix(&RenormMap::new(2.0, Structure::Base), &basis);
    let gm = g.matmul(&m);
    let mg = m.matmul(&g);
    assert!(gm.is_exactly(&mg));
    assert!(!gm.is_exactly(&GammaMatrix::identity(Structure::Base, basis.len())));
}

#[test]
fn random_character_stream_is_deterministic() {
    let params = StructureParams::default();
    let a = check_identities(&params);
    let b = check_identities(&params);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.pass, y.pass);
        assert_eq!(x.symbol, y.symbol);
    }
}
