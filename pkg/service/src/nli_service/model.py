"""Transformer-backed scorer. Imported lazily so contract tests stay
model-free; which checkpoint runs behind the endpoint is deployment
configuration the pipeline never sees.
"""

from __future__ import annotations

from typing import Sequence


def transformers_scorer(model_name: str, device: str = "cpu", max_length: int = 256):
    """Build a deterministic scorer from a sequence-classification NLI model.

    Label order differs between checkpoints; it is resolved through the
    model config's id2label mapping.
    """
    import torch
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_name)
    model = AutoModelForSequenceClassification.from_pretrained(model_name)
    model.to(device)
    model.eval()

    index = {"entail": None, "neutral": None, "contradict": None}
    for idx, label in model.config.id2label.items():
        name = label.lower()
        for key in index:
            if name.startswith(key[:7]) or key[:7] in name:
                index[key] = int(idx)
    if None in index.values():
        raise ValueError(
            f"cannot map NLI labels from id2label={model.config.id2label!r}"
        )

    def score(pairs: Sequence[tuple[str, str]]):
        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        batch = tokenizer(
            premises,
            hypotheses,
            truncation=True,
            max_length=max_length,
            padding=True,
            return_tensors="pt",
        ).to(device)
        with torch.no_grad():
            logits = model(**batch).logits
        probs = torch.softmax(logits, dim=-1).cpu()
        return [
            (
                float(row[index["entail"]]),
                float(row[index["neutral"]]),
                float(row[index["contradict"]]),
            )
            for row in probs
        ]

    return score
