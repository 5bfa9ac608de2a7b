import numpy as np
import pytest

from pathrag.config import EngineConfig
from pathrag.corpus import Document
from pathrag.embedding import HashedEmbedder
from pathrag.generation import NullCompletionClient
from pathrag.pipeline import Engine

TOY_PROFILES = {
    "arta-bank": (
        "Arta Banking Group operates a universal banking franchise across the "
        "archipelago. Arta Banking Group reported a net interest income of 4.2 "
        "billion in 2023, driven by retail lending and trade finance. The bank "
        "maintains branches in coastal provinces and funds infrastructure "
        "projects through syndicated loans."
    ),
    "lumen-retail": (
        "Lumen Retail runs a chain of convenience stores and supermarkets. "
        "Lumen Retail revenue reached 1.8 billion in 2023, with same-store "
        "sales growth of 6 percent. The grocer expanded its cold-chain "
        "logistics network and its private-label packaged food lines."
    ),
    "novara-energy": (
        "Novara Energy develops geothermal plants and solar farms. Novara "
        "Energy commissioned a 120 megawatt geothermal unit in 2023 and signed "
        "power purchase agreements with two grid operators. Capital spending "
        "focused on drilling and transmission upgrades."
    ),
    "sagemont-foods": (
        "Sagemont Foods processes packaged seafood and canned vegetables. "
        "Sagemont Foods exports to regional markets and reported an operating "
        "margin of 11 percent in 2023. The company invested in cold storage "
        "and traceability systems for its supply chain."
    ),
    "kite-telecom": (
        "Kite Telecom provides mobile and broadband services. Kite Telecom "
        "subscriber count passed 30 million in 2023 after a prepaid promotion. "
        "The carrier is rolling out fiber backhaul and leasing tower capacity "
        "from independent operators."
    ),
    "harbor-logistics": (
        "Harbor Logistics operates container terminals and bonded warehouses. "
        "Harbor Logistics throughput grew to 2.4 million TEU in 2023. The firm "
        "automated two berths and launched a customs brokerage service for "
        "electronics importers."
    ),
}


def toy_documents() -> list[Document]:
    return [Document(doc_id=doc_id, text=text)
            for doc_id, text in sorted(TOY_PROFILES.items())]


def make_engine(dim: int = 32, llm=None, **config_kwargs) -> Engine:
    cfg = EngineConfig()
    cfg.embedder.dim = dim
    cfg.chunking.window_chars = 160
    for key, value in config_kwargs.items():
        section, _, leaf = key.partition("__")
        if leaf:
            setattr(getattr(cfg, section), leaf, value)
        else:
            setattr(cfg, section, value)
    return Engine(cfg, llm=llm or NullCompletionClient())


@pytest.fixture
def documents() -> list[Document]:
    return toy_documents()


@pytest.fixture
def engine(documents) -> Engine:
    eng = make_engine()
    eng.ingest_documents(documents)
    return eng


@pytest.fixture
def embedder() -> HashedEmbedder:
    return HashedEmbedder(dim=32, seed=42)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)
