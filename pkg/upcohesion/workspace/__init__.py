"""
The CLI's on-disk state: the current model and the pending what-if.

Both are plain fact files. The pending what-if holds the seeds of the last
analysis as add_/del_ facts, preceded by a comment naming the refactoring.
"""
from typing import Tuple

import logging
import os

from ..errors import EmptyWorkspace, NoPendingWhatIf
from ..facts import DeltaSet, normalize_seeds
from ..logic import render_atom
from ..model import CohesionModel
from ..parser import parse_fact_file

logger = logging.getLogger(__name__)

MODEL_FILE = "model.pl"
PENDING_FILE = "pending.pl"


class Workspace:
    """A directory holding `model.pl` and, after a what-if, `pending.pl`."""

    def __init__(self, path: str) -> None:
        self.path = path

    @property
    def model_path(self) -> str:
        return os.path.join(self.path, MODEL_FILE)

    @property
    def pending_path(self) -> str:
        return os.path.join(self.path, PENDING_FILE)

    def has_model(self) -> bool:
        return os.path.exists(self.model_path)

    def load_model(self) -> CohesionModel:
        if not self.has_model():
            raise EmptyWorkspace(
                f"no model in {self.path}; run `upcohesion ingest` or pass --model"
            )
        return CohesionModel.load(self.model_path)

    def save_model(self, model: CohesionModel) -> None:
        """Store a model; a pending what-if for the previous model is discarded."""
        os.makedirs(self.path, exist_ok=True)
        with open(self.model_path, "w") as handle:
            handle.write(model.render())
        self.clear_pending()
        logger.info("saved model to %s", self.model_path)

    def save_pending(self, seeds: DeltaSet, description: str = "") -> None:
        os.makedirs(self.path, exist_ok=True)
        with open(self.pending_path, "w") as handle:
            if description:
                handle.write(f"% {description}\n")
            for atom in seeds.prefixed_atoms():
                handle.write(render_atom(atom) + ".\n")

    def load_pending(self) -> DeltaSet:
        if not os.path.exists(self.pending_path):
            raise NoPendingWhatIf("no what-if is pending; run `upcohesion whatif` first")
        with open(self.pending_path) as handle:
            return DeltaSet.from_prefixed_atoms(parse_fact_file(handle.read()))

    def clear_pending(self) -> None:
        if os.path.exists(self.pending_path):
            os.remove(self.pending_path)

    def commit(self) -> Tuple[CohesionModel, DeltaSet]:
        """
        Apply the pending what-if to the stored model.

        Arguments:
            None

        Returns:
            Tuple[CohesionModel, DeltaSet]: The new model and the seeds that
                were applied, re-normalized against the stored model

        """
        model = self.load_model()
        seeds, _ = normalize_seeds(model.facts, self.load_pending())
        updated = model.apply(seeds)
        self.save_model(updated)
        return updated, seeds
