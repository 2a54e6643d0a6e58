"""SVG figures for training curves, ROC curves and confusion matrices"""

from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from app.core.logging import get_logger  # noqa: E402
from app.schemas.evaluation import ConfusionMatrix  # noqa: E402
from app.schemas.training import TrainingHistory  # noqa: E402

logger = get_logger(__name__)

# fixed ids and no timestamp keep the SVG bytes reproducible
SVG_STYLE = {"svg.hashsalt": "rcad", "svg.fonttype": "path"}


def _save(fig, path: Union[str, Path]) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info("Wrote %s", path)


def plot_history(history: TrainingHistory, path: Union[str, Path], title: Optional[str] = None) -> None:
    """Loss and accuracy curves side by side, training against validation"""
    epochs = [r.epoch for r in history.records]
    with plt.rc_context(SVG_STYLE):
        fig, (loss_ax, acc_ax) = plt.subplots(1, 2, figsize=(10, 4))
        loss_ax.plot(epochs, [r.train_loss for r in history.records], label="Training loss")
        loss_ax.plot(epochs, [r.val_loss for r in history.records], label="Validation loss")
        loss_ax.set_title("Training and validation loss")
        loss_ax.set_xlabel("Epochs")
        loss_ax.set_ylabel("Loss")
        loss_ax.legend()
        acc_ax.plot(epochs, [r.train_accuracy for r in history.records], label="Training accuracy")
        acc_ax.plot(epochs, [r.val_accuracy for r in history.records], label="Validation accuracy")
        acc_ax.set_title("Training and validation accuracy")
        acc_ax.set_xlabel("Epochs")
        acc_ax.set_ylabel("Accuracy")
        acc_ax.legend()
        if title:
            fig.suptitle(title)
        _save(fig, path)


def plot_roc(
    points: Sequence[Tuple[float, float]],
    auc: Optional[float],
    path: Union[str, Path],
    title: str = "ROC curve",
) -> None:
    fpr, tpr = zip(*points) if points else ((0.0, 1.0), (0.0, 1.0))
    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        label = "ROC" if auc is None else f"ROC (AUC = {auc:.3f})"
        ax.plot(fpr, tpr, label=label)
        ax.plot([0, 1], [0, 1], linestyle="--", linewidth=1, label="Chance")
        ax.set_xlim(0.0, 1.0)
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel("False positive rate")
        ax.set_ylabel("True positive rate")
        ax.set_title(title)
        ax.legend(loc="lower right")
        _save(fig, path)


def plot_confusion(cm: ConfusionMatrix, path: Union[str, Path], title: str = "Confusion matrix") -> None:
    """Heatmap of true (rows) against predicted (columns) counts"""
    if cm.matrix is not None:
        counts = np.asarray(cm.matrix)
    else:
        counts = np.array([[cm.tn, cm.fp], [cm.fn, cm.tp]])
    k = counts.shape[0]
    with plt.rc_context(SVG_STYLE):
        fig, ax = plt.subplots(figsize=(4 + 0.5 * k, 4 + 0.5 * k))
        ax.imshow(counts, cmap="Blues")
        for i in range(k):
            for j in range(k):
                ax.text(j, i, str(counts[i, j]), ha="center", va="center")
        ax.set_xticks(range(k))
        ax.set_yticks(range(k))
        ax.set_xlabel("Predicted")
        ax.set_ylabel("True")
        ax.set_title(title)
        _save(fig, path)
