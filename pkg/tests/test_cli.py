import json

import pytest

from pathrag.cli import EXIT_BACKEND, EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from tests.conftest import TOY_PROFILES


@pytest.fixture
def workspace(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for doc_id, text in TOY_PROFILES.items():
        (corpus / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    qa = tmp_path / "qa.jsonl"
    qa.write_text(json.dumps({"question": "container terminal throughput",
                              "answer": "2.4 million TEU",
                              "doc_id": "harbor-logistics"}) + "\n",
                  encoding="utf-8")
    config = tmp_path / "config.yaml"
    config.write_text("embedder:\n  dim: 32\nchunking:\n  window_chars: 160\n",
                      encoding="utf-8")
    return {"corpus": corpus, "qa": qa, "config": config,
            "index": tmp_path / "index"}


def run(args: list[str]) -> int:
    return main(args)


class TestIngestCommand:
    def test_ingest_creates_index_dir(self, workspace, capsys):
        code = run(["ingest", "--corpus", str(workspace["corpus"]),
                    "--index", str(workspace["index"]),
                    "--config", str(workspace["config"])])
        assert code == EXIT_OK
        assert (workspace["index"] / "header").exists()
        out = capsys.readouterr().out
        assert "ingested 6 documents" in out

    def test_missing_corpus_is_data_error(self, workspace, capsys):
        code = run(["ingest", "--corpus", "/does/not/exist",
                    "--index", str(workspace["index"])])
        assert code == EXIT_DATA
        assert "error:" in capsys.readouterr().err


class TestQueryCommand:
    def ingest(self, workspace):
        run(["ingest", "--corpus", str(workspace["corpus"]),
             "--index", str(workspace["index"]),
             "--config", str(workspace["config"])])

    def test_query_json_output(self, workspace, capsys):
        self.ingest(workspace)
        capsys.readouterr()
        code = run(["query", "geothermal power plant", "--index",
                    str(workspace["index"]), "--config", str(workspace["config"]),
                    "--k", "3", "--json"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["contexts"][0]["sub_query"] == "geothermal power plant"
        assert payload["contexts"][0]["evidence"]

    def test_query_without_index_is_data_error(self, workspace, capsys):
        code = run(["query", "anything", "--index", str(workspace["index"] / "nope")])
        assert code == EXIT_DATA

    def test_query_with_wrong_embedder_dim_is_data_error(self, workspace, capsys):
        self.ingest(workspace)
        code = run(["query", "anything", "--index", str(workspace["index"]),
                    "--set", "embedder.dim=64"])
        assert code == EXIT_DATA

    def test_generate_with_null_backend_is_backend_error(self, workspace, capsys):
        self.ingest(workspace)
        code = run(["query", "anything", "--index", str(workspace["index"]),
                    "--config", str(workspace["config"]), "--generate"])
        assert code == EXIT_BACKEND


class TestEvalCommand:
    def test_eval_writes_report(self, workspace, capsys, tmp_path):
        out = tmp_path / "report.json"
        code = run(["eval", "--corpus", str(workspace["corpus"]),
                    "--qa", str(workspace["qa"]), "--method", "sparse",
                    "--config", str(workspace["config"]),
                    "--out", str(out)])
        assert code == EXIT_OK
        data = json.loads(out.read_text())
        assert data["method"] == "sparse"
        stdout = capsys.readouterr().out
        assert "Hit" in stdout and "Prec." in stdout
        assert "index construction" in stdout

    def test_eval_unknown_method_is_usage_error(self, workspace):
        code = run(["eval", "--corpus", str(workspace["corpus"]),
                    "--qa", str(workspace["qa"]), "--method", "raptor"])
        assert code == EXIT_USAGE


class TestTagCommand:
    def test_inject_and_probe(self, workspace, capsys):
        run(["ingest", "--corpus", str(workspace["corpus"]),
             "--index", str(workspace["index"]),
             "--config", str(workspace["config"])])
        capsys.readouterr()
        code = run(["tag", "inject", "--index", str(workspace["index"]),
                    "--config", str(workspace["config"]),
                    "--doc", "arta-bank", "--tag", "diversified business model",
                    "--probe", "diversified business model"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "injected tag" in out
        assert "distance" in out
        # The edit persisted: removing it afterwards is not a no-op.
        code = run(["tag", "remove", "--index", str(workspace["index"]),
                    "--config", str(workspace["config"]),
                    "--doc", "arta-bank", "--tag", "diversified business model"])
        assert code == EXIT_OK
        assert "removed tag" in capsys.readouterr().out

    def test_doc_and_chunk_are_mutually_exclusive(self, workspace):
        run(["ingest", "--corpus", str(workspace["corpus"]),
             "--index", str(workspace["index"]),
             "--config", str(workspace["config"])])
        code = run(["tag", "inject", "--index", str(workspace["index"]),
                    "--config", str(workspace["config"]), "--tag", "x"])
        assert code == EXIT_DATA


class TestUsage:
    def test_no_command_is_usage_error(self):
        assert run([]) == EXIT_USAGE

    def test_help_exits_ok(self):
        assert run(["--help"]) == EXIT_OK

    def test_unknown_flag_is_usage_error(self):
        assert run(["ingest", "--frobnicate"]) == EXIT_USAGE
