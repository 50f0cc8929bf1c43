"""A small curated building-block space for tests, demos and benchmarks.

Heads are polar amines (amino alcohols, polyamines, piperazines, amino
acids); tails are C8-C18 chains carrying one reactive handle. Every head
passes the head filter.
"""

from __future__ import annotations

from .dataset import BlockDataset, BuildingBlock, sample_subsets
from ..molgraph.smiles import parse_smiles

HEAD_POOL = (
    "NCCO",
    "NCCCO",
    "NCCCCO",
    "NCCOCCO",
    "NC(CO)CO",
    "NC(CO)(CO)CO",
    "CC(N)CO",
    "NCC(O)CO",
    "OCCNCCO",
    "CNCCO",
    "CCNCCO",
    "CN(CCO)CCO",
    "OCCN(CCO)CCO",
    "CN(C)CCO",
    "CN(C)CCCO",
    "CC(O)CN(C)C",
    "CN(C)CCOCCO",
    "CN(C)CCN(C)CCO",
    "OCCN1CCOCC1",
    "OCCCN1CCOCC1",
    "NCCN1CCOCC1",
    "NCCCN1CCOCC1",
    "OCCN1CCNCC1",
    "OCCN1CCN(CCO)CC1",
    "C1CNCCN1",
    "CN1CCNCC1",
    "CC1CNCCN1",
    "NCCN1CCNCC1",
    "CN1CCN(CCN)CC1",
    "CN1CCN(CCCN)CC1",
    "NCCN",
    "NCCCN",
    "NCCCCN",
    "NCCNCCN",
    "NCCCNCCCN",
    "CNCCNC",
    "CN(C)CCN",
    "CN(C)CCCN",
    "CN(CCCN)CCCN",
    "NCCNCCNCCN",
    "NCCCCNCCCN",
    "OCCNCCN",
    "OCCNCCNCCO",
    "NCC(=O)O",
    "NCCC(=O)O",
    "NCCCC(=O)O",
    "CN(C)CC(=O)O",
    "OC(=O)CCN1CCOCC1",
    "OC(=O)CN1CCNCC1",
    "NC(CCC(=O)O)C(=O)O",
    "NCCS",
    "NCCc1c[nH]cn1",
    "NC1CCN(CCO)CC1",
    "OCC1CCCN1",
    "OCC1CCNCC1",
    "CC(O)CNCC(C)O",
    "CN(CC(C)O)CC(C)O",
    "CC(O)CN(CC(C)O)CC(C)O",
    "NCCOCCOCCN",
    "COCCN",
    "COCCNCCOC",
    "OCCCN(CCO)CCO",
    "CC(O)CN(CCO)CCO",
    "OCCOCCN(CCO)CCO",
    "CN(CC(O)CO)CC(O)CO",
    "CN(CCO)CC(O)CO",
    "CC(C)(O)CN(CCO)CCO",
)

TAIL_POOL = (
    "CCCCCCCC(=O)O",
    "CCCCCCCCCC(=O)O",
    "CCCCCCCCCCCC(=O)O",
    "CCCCCCCCCCCCCC(=O)O",
    "CCCCCCCCCCCCCCCC(=O)O",
    "CCCCCCCCC=CCCCCCCCC(=O)O",
    "CCCCCCCCBr",
    "CCCCCCCCCCBr",
    "CCCCCCCCCCCCBr",
    "CCCCCCCCCCCCCCBr",
    "CCCCCCCCCCCCCCCCBr",
    "CCCCCCCCCCCCCl",
    "CCCCCCCCO",
    "CCCCCCCCCCO",
    "CCCCCCCCCCCCO",
    "CCCCCCCCCCCCCCO",
    "CCCCCCCCCCCCCCCCO",
    "CCCCCCCCCCCCN",
    "CCCCCCCCCCCCCCCCN",
    "CCCCCCCCCCN",
    "C=CC(=O)OCCCCCCCC",
    "C=CC(=O)OCCCCCCCCCC",
    "C=CC(=O)OCCCCCCCCCCCC",
    "C=CC(=O)OCCCCCCCCCCCCCC",
    "C=CC(=O)NCCCCCCCCCCCC",
    "CCCCCCCCCCC1CO1",
    "CCCCCCCCCCCCC1CO1",
    "CCCCCCCCC1CO1",
    "CCCCCCCCCCC=O",
    "CCCCCCCCCCCCCC=O",
    "CCCCCCCCC=O",
    "CCCCCCCCN=C=O",
    "CCCCCCCCCCCCN=C=O",
    "CCCCCCCCCCCCCCCCN=C=O",
    "CCCCCCCCCCCC(=O)Cl",
    "CCCCCCCCCCCCCCCC(=O)Cl",
    "CCCCCCCCCC(=O)Cl",
    "CCCCCCCCCCCCS(=O)(=O)Cl",
)


def pool_dataset() -> BlockDataset:
    heads = [BuildingBlock.from_molecule(f"H{i:03d}", parse_smiles(s), "head") for i, s in enumerate(HEAD_POOL)]
    tails = [BuildingBlock.from_molecule(f"T{i:03d}", parse_smiles(s), "tail") for i, s in enumerate(TAIL_POOL)]
    return BlockDataset(heads, tails, {"source": "toy pools"})


def toy_dataset(seed: int, n_heads: int = 50, n_tails: int = 30, test_heads: int = 0):
    """Seeded subset of the pools; see :func:`sample_subsets` for ``test_heads``."""
    return sample_subsets(pool_dataset(), n_heads, n_tails, seed, test_heads=test_heads)
