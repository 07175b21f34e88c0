"""Versioned JSON persistence for evolved chromosomes."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from importlib import resources

from .karva import (
    CONSTANT,
    Chromosome,
    FunctionSet,
    Gene,
    KarvaError,
    evaluate_chromosome,
    chromosome_infix,
    function,
    tail_length,
)

FORMAT = "gepucs-model"
VERSION = 1


class ModelFileError(ValueError):
    pass


@dataclass(frozen=True)
class ModelFile:
    function_set: tuple[str, ...]
    head_length: int
    linking: str
    terminals: tuple[str, ...]
    genes: tuple[Gene, ...]
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def num_genes(self) -> int:
        return len(self.genes)

    @property
    def functions(self) -> FunctionSet:
        return FunctionSet.of(self.function_set)

    @property
    def chromosome(self) -> Chromosome:
        return Chromosome(self.genes, function(self.linking))

    @classmethod
    def from_chromosome(cls, chrom: Chromosome, functions: FunctionSet,
                        terminals, provenance=None) -> ModelFile:
        return cls(functions.ids, chrom.head_length, chrom.linking.id,
                   tuple(terminals), chrom.genes, dict(provenance or {}))

    def predict(self, features):
        return evaluate_chromosome(self.chromosome, features, self.functions, self.terminals)

    def infix(self) -> str:
        return chromosome_infix(self.chromosome, self.functions, self.terminals)

    def to_json(self) -> str:
        doc = {
            "format": FORMAT,
            "version": VERSION,
            "function_set": list(self.function_set),
            "head_length": self.head_length,
            "num_genes": self.num_genes,
            "linking": self.linking,
            "terminals": list(self.terminals),
            "genes": [
                {
                    "symbols": " ".join(g.symbols),
                    "dc": list(g.dc),
                    "constants": list(g.constants),
                }
                for g in self.genes
            ],
            "expression": self.infix(),
            "provenance": self.provenance,
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ModelFile:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ModelFileError(f"not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or doc.get("format") != FORMAT:
            raise ModelFileError("not a gepucs model file")
        if doc.get("version") != VERSION:
            raise ModelFileError(f"unsupported model version {doc.get('version')!r}")
        try:
            functions = FunctionSet.of(doc["function_set"])
            h = int(doc["head_length"])
            t = tail_length(h, functions.max_arity)
            terminals = tuple(doc["terminals"])
            genes = tuple(
                Gene(tuple(g["symbols"].split()), h, t,
                     tuple(int(i) for i in g["dc"]),
                     tuple(float(c) for c in g["constants"]))
                for g in doc["genes"]
            )
            if len(genes) != int(doc["num_genes"]):
                raise ModelFileError("num_genes does not match the gene list")
            for g in genes:
                g.validate(functions, terminals + ((CONSTANT,) if g.dc else ()))
            model = cls(functions.ids, h, function(doc["linking"]).id, terminals, genes,
                        doc.get("provenance") or {})
            model.chromosome  # noqa: B018 - shape checks
        except (KeyError, TypeError, AttributeError) as exc:
            raise ModelFileError(f"malformed model file: {exc!r}") from None
        except KarvaError as exc:
            raise ModelFileError(str(exc)) from None
        return model

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.to_json())

    @classmethod
    def load(cls, path) -> ModelFile:
        with open(path, encoding="utf-8") as f:
            return cls.from_json(f.read())


def digest(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return "sha256:" + hashlib.sha256(data).hexdigest()


def config_digest(config) -> str:
    return digest(json.dumps(asdict(config), sort_keys=True))


def eq2_model() -> ModelFile:
    from .reference import EQ2_FUNCTIONS, EQ2_TERMINALS, eq2_chromosome

    return ModelFile.from_chromosome(
        eq2_chromosome(), EQ2_FUNCTIONS, EQ2_TERMINALS,
        {"source": "published carbonate UCS formula", "seed": None,
         "config_digest": None, "train_digest": None},
    )


def eq2_model_path():
    return resources.files("gepucs") / "data" / "eq2_model.json"
