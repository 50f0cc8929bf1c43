import random

import pytest
from hypothesis import given, strategies as st

from lipidforge.molgraph import (
    Atom,
    Bond,
    BondOrder,
    Fingerprint,
    MissingAtomTypeError,
    Molecule,
    MoleculeError,
    SizeLimitError,
    SmilesError,
    UnsupportedElementError,
    ValenceError,
    functional_groups,
    ged_le_one,
    is_isomorphic,
    log_p,
    molecular_weight,
    morgan_fingerprint,
    parse_smiles,
    tanimoto,
    to_smiles,
)
from lipidforge.molgraph.descriptors import load_logp_table
from lipidforge.molgraph.fingerprint import atom_identifiers
from lipidforge.molgraph.io import read_smiles_file

from oracles import same_graph, within_one_edit


def shuffled(mol, seed):
    order = list(range(len(mol.atoms)))
    random.Random(seed).shuffle(order)
    return mol.permuted(order)


# -- parsing ----------------------------------------------------------------

def test_methane_has_four_hydrogens():
    m = parse_smiles("C")
    assert len(m.atoms) == 1 and m.atoms[0].implicit_h == 4


def test_linear_chain_bonds():
    m = parse_smiles("OCC")
    assert [a.element for a in m.atoms] == ["O", "C", "C"]
    assert {(b.a, b.b) for b in m.bonds} == {(0, 1), (1, 2)}


def test_cyclopropane_matches_hand_built_graph():
    m = parse_smiles("C1CC1")
    hand = Molecule(tuple(Atom("C", 0, 2) for _ in range(3)), (Bond(0, 1), Bond(1, 2), Bond(0, 2)))
    assert same_graph(m, hand)
    assert all(m.in_ring(i) for i in range(3))


@pytest.mark.parametrize("text", ["c1ccccc1", "C1=CC=CC=C1"])
def test_benzene_is_aromatic(text):
    m = parse_smiles(text)
    assert all(a.aromatic for a in m.atoms)
    assert all(b.order is BondOrder.AROMATIC for b in m.bonds)


def test_bracket_atoms_and_two_digit_ring_closures():
    m = parse_smiles("C%10CC%10")
    assert len(m.bonds) == 3
    q = parse_smiles("C[N+](C)(C)C")
    assert q.atoms[1].formal_charge == 1 and q.atoms[1].implicit_h == 0
    assert parse_smiles("[NH4+]").atoms[0].implicit_h == 4


def test_stereo_marks_are_dropped():
    assert parse_smiles("N[C@@H](C)C(=O)O").canonical_smiles == parse_smiles("NC(C)C(=O)O").canonical_smiles


@pytest.mark.parametrize("bad, exc", [
    ("", SmilesError),
    ("C1CC", SmilesError),
    ("C(C", SmilesError),
    ("CC)", SmilesError),
    ("[Xe]", UnsupportedElementError),
    ("C(C)(C)(C)(C)C", ValenceError),
])
def test_parser_errors(bad, exc):
    with pytest.raises(exc):
        parse_smiles(bad)


def test_syntax_error_reports_position():
    with pytest.raises(SmilesError) as info:
        parse_smiles("CC$C")
    assert info.value.position == 2


def test_molecule_invariants_enforced():
    with pytest.raises(MoleculeError):
        Molecule((Atom("C"),), (Bond(0, 0),))
    with pytest.raises(MoleculeError):
        Molecule((Atom("C"), Atom("C")), (Bond(0, 1), Bond(1, 0)))
    with pytest.raises(MoleculeError):
        Molecule((Atom("C"), Atom("C")), (Bond(0, 5),))
    with pytest.raises(MoleculeError):
        Molecule((Atom("C", aromatic=True), Atom("C")), (Bond(0, 1, BondOrder.AROMATIC),))


# -- canonical SMILES -------------------------------------------------------

def test_isomorphic_inputs_share_canonical_form():
    assert parse_smiles("OCC").canonical_smiles == parse_smiles("CCO").canonical_smiles


def test_cyclopropane_is_a_fixpoint():
    c = parse_smiles("C1CC1").canonical_smiles
    assert parse_smiles(c).canonical_smiles == c


def test_hundred_permutations_of_a_twelve_atom_molecule():
    m = parse_smiles("CCN(CCO)CC(=O)OCC")
    assert len(m.atoms) == 12
    forms = {shuffled(m, s).canonical_smiles for s in range(100)}
    assert len(forms) == 1


def test_corpus_round_trip(corpus):
    for m in corpus:
        back = parse_smiles(m.canonical_smiles)
        assert same_graph(m, back), m.canonical_smiles


@given(st.data())
def test_canonical_form_is_permutation_invariant(corpus, data):
    m = data.draw(st.sampled_from(corpus))
    seed = data.draw(st.integers(0, 10_000))
    p = shuffled(m, seed)
    assert p.canonical_smiles == m.canonical_smiles
    assert morgan_fingerprint(p) == morgan_fingerprint(m)
    assert molecular_weight(p) == pytest.approx(molecular_weight(m), abs=1e-9)
    assert log_p(p) == pytest.approx(log_p(m), abs=1e-9)
    assert functional_groups(p).amine_count == functional_groups(m).amine_count
    assert functional_groups(p).hydroxyl_count == functional_groups(m).hydroxyl_count
    assert functional_groups(p).carboxyl_count == functional_groups(m).carboxyl_count


@given(st.data())
def test_random_smiles_spellings_parse_to_the_same_molecule(corpus, data):
    m = data.draw(st.sampled_from(corpus))
    text = to_smiles(m, seed=data.draw(st.integers(0, 10_000)))
    assert parse_smiles(text).canonical_smiles == m.canonical_smiles


# -- descriptors ------------------------------------------------------------

@pytest.mark.parametrize("smiles, mass", [("C", 12.011 + 4 * 1.008), ("O", 15.999 + 2 * 1.008)])
def test_molecular_weight(smiles, mass):
    assert molecular_weight(parse_smiles(smiles)) == pytest.approx(mass, abs=0.01)


def test_log_p_signs_and_monotonicity():
    assert log_p(parse_smiles("CCCCCCCCCCCCCCCC")) > 0
    assert log_p(parse_smiles("NCCO")) < 0
    assert log_p(parse_smiles("CCCCCCCC")) > log_p(parse_smiles("CCCC"))


@given(st.integers(1, 30))
def test_log_p_strictly_increases_with_alkane_length(n):
    assert log_p(parse_smiles("C" * (n + 1))) > log_p(parse_smiles("C" * n))


def test_log_p_names_missing_atom_type(tmp_path):
    table = tmp_path / "t.tsv"
    table.write_text("[#6]\t0.1\nH:[#6]\t0.1\n")
    with pytest.raises(MissingAtomTypeError, match="O"):
        log_p(parse_smiles("CO"), load_logp_table(table))


@pytest.mark.parametrize("smiles, carboxyl, hydroxyl, amine", [
    ("NCC(=O)O", 1, 0, 1),
    ("CC(N)=O", 0, 0, 0),
    ("CCO", 0, 1, 0),
    ("OCCN(CCO)CCO", 0, 3, 1),
    ("NN", 0, 0, 0),
    ("C[N+](C)(C)C", 0, 0, 0),
])
def test_functional_groups(smiles, carboxyl, hydroxyl, amine):
    g = functional_groups(parse_smiles(smiles))
    assert (g.carboxyl_count, g.hydroxyl_count, g.amine_count) == (carboxyl, hydroxyl, amine)


def test_excluded_amines_carry_reasons():
    reasons = dict((i, r) for i, r in functional_groups(parse_smiles("CC(=O)NCCNN")).excluded_amine_sites)
    assert sorted(reasons.values()) == ["amide_adjacent", "n_n_linked", "n_n_linked"]
    assert functional_groups(parse_smiles("C[N+](C)(C)C")).has_quaternary


@given(st.data())
def test_amine_sites_and_exclusions_are_disjoint(corpus, data):
    g = functional_groups(data.draw(st.sampled_from(corpus)))
    assert not set(g.amine_sites) & {i for i, _ in g.excluded_amine_sites}
    assert g.amine_count == len(g.amine_sites)


# -- fingerprints -----------------------------------------------------------

def test_single_atom_radius_zero_sets_one_bit():
    assert morgan_fingerprint(parse_smiles("C"), radius=0).popcount == 1


def test_fingerprint_isomorphism_invariance():
    assert morgan_fingerprint(parse_smiles("CCO")) == morgan_fingerprint(parse_smiles("OCC"))


def test_popcount_bounded_by_distinct_environments(corpus):
    for m in corpus[:100]:
        envs = set().union(*atom_identifiers(m, 2))
        assert 1 <= morgan_fingerprint(m).popcount <= len(envs)


@pytest.mark.parametrize("radius, nbits", [(-1, 1024), (2, 1000), (2, 32)])
def test_fingerprint_argument_checks(radius, nbits):
    with pytest.raises(ValueError):
        morgan_fingerprint(parse_smiles("CC"), radius, nbits)


def test_tanimoto_values():
    a = Fingerprint(0b1100, nbits=64)
    b = Fingerprint(0b0110, nbits=64)
    assert tanimoto(a, b) == pytest.approx(1 / 3)
    assert tanimoto(a, a) == 1.0
    assert tanimoto(a, Fingerprint(0b0011, nbits=64)) == 0.0
    with pytest.raises(ValueError):
        tanimoto(a, Fingerprint(1, nbits=128))


@given(st.data())
def test_tanimoto_symmetric(corpus, data):
    a = morgan_fingerprint(data.draw(st.sampled_from(corpus)))
    b = morgan_fingerprint(data.draw(st.sampled_from(corpus)))
    assert tanimoto(a, b) == tanimoto(b, a)
    assert 0.0 <= tanimoto(a, b) <= 1.0


# -- isomorphism and edit distance -------------------------------------------

@pytest.mark.parametrize("a, b, expected", [
    ("CCCC", "CCCC", True),
    ("CCCC", "CCC", True),
    ("CCCC", "CC", False),
    ("CCCC", "CCCO", True),
    ("CCCC", "C=CCC", True),
    ("CCCC", "C1CCC1", True),
    ("CCCC", "CC(C)C", False),
    ("c1ccccc1", "CCCCCC", False),
])
def test_ged_le_one_cases(a, b, expected):
    assert ged_le_one(parse_smiles(a), parse_smiles(b)) is expected


SMALL = ["CC", "CCC", "CCO", "CC=O", "CCN", "C1CC1", "CC(C)C", "CCCC", "OCCO", "CC#N", "C=CC", "CCOC", "NCCN"]


@given(st.sampled_from(SMALL), st.sampled_from(SMALL))
def test_ged_le_one_agrees_with_edit_enumeration(a, b):
    ma, mb = parse_smiles(a), parse_smiles(b)
    expected = within_one_edit(ma, mb) or within_one_edit(mb, ma)
    assert ged_le_one(ma, mb) is expected


def test_ged_size_limit():
    big = parse_smiles("C" * 70)
    with pytest.raises(SizeLimitError):
        ged_le_one(big, big)


def test_is_isomorphic_respects_hydrogens():
    assert is_isomorphic(parse_smiles("CCO"), parse_smiles("OCC"))
    assert not is_isomorphic(parse_smiles("CC=O"), parse_smiles("CCO"))


# -- file reading -----------------------------------------------------------

def test_smiles_file_reader(tmp_path):
    f = tmp_path / "in.smi"
    f.write_text("# comment\nCCO\tethanol\n\nC1CC\tbroken\nNCCO ZINC001\n")
    recs = read_smiles_file(f)
    assert [r.ident for r in recs] == ["ethanol", "broken", "ZINC001"]
    assert recs[1].molecule is None and recs[1].error
    with pytest.raises(SmilesError):
        read_smiles_file(f, strict=True)
