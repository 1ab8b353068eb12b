"""
Model-spec files: the JSON documents the CLI reads to build models.

    {
      "kpacf": {"kind": "arma", "theta": {"ar": [0.95], "ma": [-0.85]}, "horizon": 30},
      "copula": {"family": "gumbel", "negative_rule": "rotate"},
      "truncation_lag": 30,
      "margin": {"kind": "normal", "params": {"mu": 0, "sigma": 1}}
    }

"copula" may list several families under "families" (used by the
experiment command). A spec may give an explicit "sequence" of pair copulas
instead of a kpacf. Unknown keys are rejected.
"""

import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from svine.core.config import DEFAULT_NEGATIVE_ROTATION
from svine.core.errors import DomainError, InputError
from svine.core.linear_oracle import KpacfSpec
from svine.core.margins import MarginalModel, MarginKind
from svine.core.paircopula import Family, NegativeTauRule
from svine.core.process import SVineModel
from svine.core.rosenblatt import CopulaSequence

_TOP_KEYS = {"kpacf", "sequence", "copula", "truncation_lag", "margin", "description"}
_COPULA_KEYS = {"family", "families", "negative_rule", "negative_rotation", "positive_rotation"}


@dataclass(frozen=True)
class ModelSpecFile:
    kpacf: Optional[KpacfSpec] = None
    sequence: Optional[CopulaSequence] = None
    families: List[Family] = field(default_factory=list)
    negative_rule: NegativeTauRule = NegativeTauRule.ROTATE
    negative_rotation: int = DEFAULT_NEGATIVE_ROTATION
    positive_rotation: int = 0
    truncation_lag: Optional[int] = None
    margin: Optional[MarginalModel] = None
    margin_kind: Optional[MarginKind] = None
    description: str = ""

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelSpecFile":
        if not isinstance(data, dict):
            raise InputError("model spec must be a JSON object")
        unknown = set(data) - _TOP_KEYS
        if unknown:
            raise InputError(f"Unknown model-spec keys: {sorted(unknown)}")
        if ("kpacf" in data) == ("sequence" in data):
            raise InputError("model spec needs exactly one of 'kpacf' or 'sequence'")

        copula = data.get("copula", {}) or {}
        unknown = set(copula) - _COPULA_KEYS
        if unknown:
            raise InputError(f"Unknown copula keys: {sorted(unknown)}")
        names = list(copula.get("families", []))
        if "family" in copula:
            names.insert(0, copula["family"])
        try:
            families = [Family(n) for n in names]
            rule = NegativeTauRule(copula.get("negative_rule", NegativeTauRule.ROTATE.value))
        except ValueError as e:
            raise InputError(f"Invalid copula settings: {e}") from e

        kpacf = KpacfSpec.from_dict(data["kpacf"]) if "kpacf" in data else None
        sequence = CopulaSequence.from_dict(data["sequence"]) if "sequence" in data else None
        if kpacf is not None and not families:
            raise InputError("a kpacf spec needs a copula family")

        margin, margin_kind = None, None
        if data.get("margin") is not None:
            raw = data["margin"]
            if set(raw) <= {"kind"}:
                try:
                    margin_kind = MarginKind(raw.get("kind"))
                except ValueError as e:
                    raise InputError(f"Invalid margin kind: {raw.get('kind')!r}") from e
            else:
                margin = MarginalModel.from_dict(raw)
                margin_kind = margin.kind

        truncation = data.get("truncation_lag")
        spec = cls(
            kpacf=kpacf,
            sequence=sequence,
            families=families,
            negative_rule=rule,
            negative_rotation=int(copula.get("negative_rotation", DEFAULT_NEGATIVE_ROTATION)),
            positive_rotation=int(copula.get("positive_rotation", 0)),
            truncation_lag=int(truncation) if truncation is not None else None,
            margin=margin,
            margin_kind=margin_kind,
            description=str(data.get("description", "")),
        )
        # build every listed model once so invalid settings fail before any computation
        for family in spec.families or [None]:
            spec.model(family)
        return spec

    @classmethod
    def load(cls, path: str) -> "ModelSpecFile":
        if not os.path.isfile(path):
            raise InputError(f"Spec file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise InputError(f"Spec file {path} is not valid JSON: {e}") from e
        return cls.from_dict(data)

    def with_overrides(
        self,
        family: Optional[str] = None,
        negative_rule: Optional[str] = None,
        truncation: Optional[int] = None,
    ) -> "ModelSpecFile":
        data = self.to_dict()
        if family is not None:
            data.setdefault("copula", {})
            data["copula"].pop("families", None)
            data["copula"]["family"] = family
        if negative_rule is not None:
            data.setdefault("copula", {})["negative_rule"] = negative_rule
        if truncation is not None:
            data["truncation_lag"] = truncation
        return ModelSpecFile.from_dict(data)

    def model(self, family: Optional[Family] = None) -> SVineModel:
        """The model for one family (the first listed by default)."""
        if self.sequence is not None:
            seq = self.sequence if self.truncation_lag is None else self.sequence.truncated(self.truncation_lag)
            return SVineModel(seq, self.margin)
        family = family or self.families[0]
        if family is Family.INDEPENDENCE:
            p = self.truncation_lag if self.truncation_lag is not None else self.kpacf.horizon
            return SVineModel(CopulaSequence.independence(p), self.margin)
        try:
            return SVineModel.from_kpacf(
                self.kpacf,
                family,
                self.negative_rule,
                self.truncation_lag,
                self.margin,
                self.negative_rotation,
                self.positive_rotation,
            )
        except DomainError as e:
            raise InputError(f"Spec cannot be realized with family {family.value}: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        if self.description:
            data["description"] = self.description
        if self.kpacf is not None:
            data["kpacf"] = self.kpacf.to_dict()
        if self.sequence is not None:
            data["sequence"] = self.sequence.to_dict()
        copula: Dict[str, Any] = {
            "negative_rule": self.negative_rule.value,
            "negative_rotation": self.negative_rotation,
            "positive_rotation": self.positive_rotation,
        }
        if len(self.families) == 1:
            copula["family"] = self.families[0].value
        elif self.families:
            copula["families"] = [f.value for f in self.families]
        data["copula"] = copula
        if self.truncation_lag is not None:
            data["truncation_lag"] = self.truncation_lag
        if self.margin is not None:
            data["margin"] = self.margin.to_dict()
        elif self.margin_kind is not None:
            data["margin"] = {"kind": self.margin_kind.value}
        return data
