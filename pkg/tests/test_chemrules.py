import itertools

import pytest
from hypothesis import given, strategies as st

from lipidforge.blocks.toy import HEAD_POOL, TAIL_POOL
from lipidforge.chemrules import (
    ReactionError,
    TemplateSyntaxError,
    TemplateValidationError,
    apply,
    can_react,
    conservation_violation,
    default_registry,
    enumerate_products,
    load_templates,
    matches,
    parse_templates,
)
from lipidforge.molgraph import parse_smiles

from oracles import heavy_formula, same_graph

REG = default_registry()
M = parse_smiles


def test_default_registry_has_thirteen_templates():
    assert len(REG) == 13
    assert len(set(REG.ids)) == 13
    for t in REG:
        t.validate()
        assert t.arity == 2


def test_registry_order_is_file_order():
    assert REG.ids[0] == "amide_coupling"
    assert [REG.order_of(i) for i in REG.ids] == list(range(13))


def test_empty_file_gives_empty_registry_with_warning(tmp_path, caplog):
    f = tmp_path / "none.txt"
    f.write_text("# nothing here\n")
    reg = load_templates(f)
    assert len(reg) == 0
    assert "no templates" in caplog.text


TEMPLATE = """template t{n}
arity 2
pattern1 [N;!H0:1]
pattern2 [C:2][Br:3]
leave 3
bond + 1 2
end
"""


def test_duplicate_id_is_rejected_with_line():
    with pytest.raises(TemplateSyntaxError, match=":9:"):
        parse_templates(TEMPLATE.format(n=1) + "\n" + TEMPLATE.format(n=1))


def test_unknown_directive_reports_line():
    with pytest.raises(TemplateSyntaxError, match=":3:"):
        parse_templates("template x\narity 2\nfrobnicate 1\nend\n")


def test_edit_on_unmapped_atom_fails_validation():
    bad = TEMPLATE.format(n=1).replace("bond + 1 2", "bond + 1 7")
    with pytest.raises(TemplateValidationError, match="t1"):
        parse_templates(bad)


def test_amide_template_matches_amine_and_acid():
    t = REG["amide_coupling"]
    assert len(matches(t, [M("CCN"), M("CC(=O)O")])) >= 1
    assert matches(t, [M("CC"), M("CC")]) == []


def test_amine_pattern_binds_each_diamine_nitrogen():
    assert len(matches(REG["amide_coupling"], [M("NCCN"), M("CC(=O)O")])) == 2


def test_arity_mismatch_raises():
    with pytest.raises(ValueError):
        matches(REG["amide_coupling"], [M("CCN")])


@pytest.mark.parametrize("template, a, b, product", [
    ("amide_coupling", "CCN", "CC(=O)O", "CCNC(C)=O"),
    ("esterification", "CCO", "CC(=O)O", "CCOC(C)=O"),
    ("n_alkylation", "CCN", "CCBr", "CCNCC"),
    ("reductive_amination", "CCN", "CC=O", "CCNCC"),
    ("aza_michael_addition", "CCN", "C=CC(=O)OC", "CCNCCC(=O)OC"),
    ("epoxide_aminolysis", "CCN", "CC1CO1", "CCNCC(C)O"),
    ("urea_from_isocyanate", "CCN", "CCN=C=O", "CCNC(=O)NCC"),
    ("carbamate_from_isocyanate", "CCO", "CCN=C=O", "CCNC(=O)OCC"),
    ("o_alkylation", "CCO", "CCBr", "CCOCC"),
])
def test_hand_checked_products(template, a, b, product):
    t = REG[template]
    made = {apply(t, [M(a), M(b)], bd).canonical_smiles for bd in matches(t, [M(a), M(b)])}
    assert M(product).canonical_smiles in made


def test_amide_heavy_atom_bookkeeping():
    t = REG["amide_coupling"]
    reactants = [M("CCN"), M("CC(=O)O")]
    (binding,) = matches(t, reactants)
    product = apply(t, reactants, binding)
    assert len(product.atoms) == 3 + 4 - 1
    assert conservation_violation(t, reactants, binding, product) is None


def test_valence_violation_is_rejected():
    # a tertiary amine nitrogen has no hydrogen to give up
    t = parse_templates(TEMPLATE.format(n=1).replace("[N;!H0:1]", "[N:1]"))["t1"]
    reactants = [M("CN(C)C"), M("CCBr")]
    (binding,) = matches(t, reactants)
    with pytest.raises(ReactionError):
        apply(t, reactants, binding)


def test_enumeration_of_unreactive_pair_is_empty():
    assert enumerate_products(REG, M("CCCC"), M("CCCC")) == []
    assert not can_react(REG, M("CCCC"), M("CCCC"))


def test_single_amide_match_gives_one_entry():
    out = enumerate_products(REG, M("CCN"), M("CCCCCCCCCCCC(=O)O"))
    assert [e.template_id for e in out] == ["amide_coupling"]


def test_diacid_with_monoamine_lists_both_mono_amides():
    out = enumerate_products(REG, M("CCN"), M("OC(=O)CCCC(=O)O"))
    assert len(out) == 1  # symmetric diacid: both acids give the same product
    out = enumerate_products(REG, M("CCN"), M("OC(=O)CCC(C)C(=O)O"))
    amides = [e for e in out if e.template_id == "amide_coupling"]
    assert len(amides) == 2 and amides[0].smiles != amides[1].smiles


def test_enumeration_is_sorted_and_unique():
    out = enumerate_products(REG, M("NCCO"), M("CCCCCCCCCCCC(=O)O"))
    keys = [(REG.order_of(e.template_id), e.smiles) for e in out]
    assert keys == sorted(keys)
    assert len({e.smiles for e in out}) == len(out)
    assert {e.template_id for e in out} == {"amide_coupling", "esterification"}


@given(st.sampled_from(HEAD_POOL), st.sampled_from(TAIL_POOL))
def test_can_react_mirrors_enumeration(head, tail):
    h, t = M(head), M(tail)
    products = enumerate_products(REG, h, t)
    assert can_react(REG, h, t) is bool(products)
    assert enumerate_products(REG, h, t) == products


@given(st.sampled_from(HEAD_POOL), st.sampled_from(TAIL_POOL))
def test_products_are_connected_and_reparse(head, tail):
    for entry in enumerate_products(REG, M(head), M(tail)):
        assert entry.molecule.is_connected
        entry.molecule.check_valence()
        assert same_graph(M(entry.smiles), entry.molecule)


def _leaving_formula(template, reactants, binding):
    from collections import Counter
    out = Counter()
    for m in template.leaving:
        k, i = binding.atom_for(m)
        out[reactants[k].atoms[i].element] += 1
    return out


def conservation_fuzz(limit=1000):
    """Apply every template binding over pool pairs (and their products) until ``limit`` products."""
    heads = [M(s) for s in HEAD_POOL]
    tails = [M(s) for s in TAIL_POOL]
    checked, violations = 0, []
    states = list(heads)
    for state, tail in itertools.product(states, tails):
        for t in REG:
            for pair in ((state, tail), (tail, state)):
                for binding in matches(t, pair):
                    try:
                        product = apply(t, pair, binding)
                    except ReactionError:
                        continue
                    checked += 1
                    if heavy_formula(product) + _leaving_formula(t, pair, binding) != heavy_formula(*pair):
                        violations.append((t.id, pair[0].canonical_smiles, pair[1].canonical_smiles))
                    if len(states) < 400:
                        states.append(product)
                    if checked >= limit:
                        return checked, violations
    return checked, violations


def test_heavy_atom_conservation_fuzz():
    checked, violations = conservation_fuzz(1000)
    assert checked == 1000
    assert violations == []
