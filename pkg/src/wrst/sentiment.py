"""Sentiment classification on top of weighted discourse trees.

Each EDU is embedded as the mean of its token vectors, the tree's weight
pairs combine the leaf vectors bottom-up into one document vector (a
convex combination of the leaves), and a softmax classifier predicts the
document's class from that vector.  The classifier is linear by default;
a single hidden layer can be enabled where a stronger separator is
wanted, but nothing in the pipeline requires it.
"""

from __future__ import annotations

import numpy as np

from .tree import DiscourseTree, Internal, Leaf, Node
from .treebank import DocumentTokens, EmbeddingTable


def embed_leaves(doc: DocumentTokens, table: EmbeddingTable) -> list[np.ndarray]:
    """Mean token vector per EDU; unknown tokens use the table's fallback."""
    out = []
    for edu in doc.edus:
        if len(edu) == 0:
            raise ValueError(f"document {doc.doc_id!r} has an empty EDU")
        out.append(np.mean([table.lookup(tok) for tok in edu], axis=0))
    return out


def aggregate(tree: DiscourseTree, leaves: list[np.ndarray]) -> np.ndarray:
    """Combine leaf vectors bottom-up with each node's weight pair.

    Equivalent to summing every leaf vector scaled by the product of the
    branch weights on its root path.
    """
    if len(leaves) != tree.n_edus:
        raise ValueError(f"{len(leaves)} leaf vectors for a tree over {tree.n_edus} EDUs")

    def fold(node: Node) -> np.ndarray:
        if isinstance(node, Leaf):
            return np.asarray(leaves[node.edu - 1], dtype=float)
        if not node.has_weights:
            raise ValueError("aggregate requires a fully weighted tree")
        return fold(node.left) * node.weight_left + fold(node.right) * node.weight_right

    return fold(tree.root)


class LinearClassifier:
    """Softmax classifier, linear by default with an optional hidden layer.

    Instances are immutable: training returns a new classifier and never
    touches the parameters of an existing one.
    """

    def __init__(
        self,
        weights: np.ndarray,
        bias: np.ndarray,
        hidden_weights: np.ndarray | None = None,
        hidden_bias: np.ndarray | None = None,
    ):
        self.weights = np.asarray(weights, dtype=float)
        self.bias = np.asarray(bias, dtype=float)
        self.hidden_weights = None if hidden_weights is None else np.asarray(hidden_weights, dtype=float)
        self.hidden_bias = None if hidden_bias is None else np.asarray(hidden_bias, dtype=float)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("weights must be (classes, dim) with a matching bias")
        if self.num_classes < 2:
            raise ValueError(f"need at least 2 classes, got {self.num_classes}")

    @classmethod
    def create(cls, dim: int, num_classes: int, hidden_units: int = 0, seed: int = 0) -> "LinearClassifier":
        """Fresh classifier: zero output layer, seeded small random hidden layer."""
        if hidden_units <= 0:
            return cls(np.zeros((num_classes, dim)), np.zeros(num_classes))
        rng = np.random.default_rng(seed)
        return cls(
            np.zeros((num_classes, hidden_units)),
            np.zeros(num_classes),
            hidden_weights=rng.normal(scale=0.1, size=(hidden_units, dim)),
            hidden_bias=np.zeros(hidden_units),
        )

    @property
    def num_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        if self.hidden_weights is not None:
            return self.hidden_weights.shape[1]
        return self.weights.shape[1]

    @property
    def has_hidden(self) -> bool:
        return self.hidden_weights is not None

    def params(self) -> tuple[np.ndarray, ...]:
        if self.has_hidden:
            return (self.weights, self.bias, self.hidden_weights, self.hidden_bias)
        return (self.weights, self.bias)

    def with_params(self, params: tuple[np.ndarray, ...]) -> "LinearClassifier":
        if self.has_hidden:
            return LinearClassifier(params[0], params[1], params[2], params[3])
        return LinearClassifier(params[0], params[1])

    def logits(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.dim:
            raise ValueError(f"feature dimension {features.shape[1]} != classifier dimension {self.dim}")
        if self.has_hidden:
            features = np.tanh(features @ self.hidden_weights.T + self.hidden_bias)
        return features @ self.weights.T + self.bias


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def predict(clf: LinearClassifier, vector: np.ndarray) -> tuple[int, np.ndarray]:
    """Class of a single document vector plus its softmax distribution.

    Ties pick the lowest class index.
    """
    probs = _softmax(clf.logits(vector))[0]
    return int(np.argmax(probs)), probs


def mean_loss(clf: LinearClassifier, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean softmax cross-entropy over a dataset."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=int)
    probs = _softmax(clf.logits(features))
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.mean(np.log(picked)))


def loss_and_gradients(
    clf: LinearClassifier, features: np.ndarray, labels: np.ndarray
) -> tuple[float, tuple[np.ndarray, ...]]:
    """Mean cross-entropy and its gradient for every parameter array."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=int)
    if np.any(labels < 0) or np.any(labels >= clf.num_classes):
        raise ValueError("labels outside the classifier's class range")
    count = features.shape[0]

    if clf.has_hidden:
        hidden = np.tanh(features @ clf.hidden_weights.T + clf.hidden_bias)
        inputs = hidden
    else:
        inputs = features
    logits = inputs @ clf.weights.T + clf.bias
    probs = _softmax(logits)
    picked = probs[np.arange(count), labels]
    loss = float(-np.mean(np.log(picked)))

    delta = probs.copy()
    delta[np.arange(count), labels] -= 1.0
    delta /= count
    grad_w = delta.T @ inputs
    grad_b = delta.sum(axis=0)
    if not clf.has_hidden:
        return loss, (grad_w, grad_b)

    delta_hidden = (delta @ clf.weights) * (1.0 - hidden**2)
    grad_hw = delta_hidden.T @ features
    grad_hb = delta_hidden.sum(axis=0)
    return loss, (grad_w, grad_b, grad_hw, grad_hb)


def train(
    clf: LinearClassifier,
    features: np.ndarray,
    labels: np.ndarray,
    epochs: int,
    learning_rate: float,
    seed: int = 0,
    batch_size: int = 32,
) -> LinearClassifier:
    """Mini-batch gradient descent with seeded per-epoch shuffling.

    Zero epochs return the classifier unchanged.  Results are a pure
    function of the inputs, the seed, and the batch size.
    """
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels, dtype=int)
    if features.shape[0] != labels.shape[0]:
        raise ValueError("features and labels disagree on the number of examples")
    if features.shape[1] != clf.dim:
        raise ValueError(f"feature dimension {features.shape[1]} != classifier dimension {clf.dim}")
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    if batch_size < 1:
        raise ValueError("batch size must be at least 1")
    if epochs == 0:
        return clf

    rng = np.random.default_rng(seed)
    params = tuple(p.copy() for p in clf.params())
    current = clf.with_params(params)
    count = features.shape[0]
    for _ in range(epochs):
        order = rng.permutation(count)
        for lo in range(0, count, batch_size):
            batch = order[lo:lo + batch_size]
            _, grads = loss_and_gradients(current, features[batch], labels[batch])
            params = tuple(p - learning_rate * g for p, g in zip(current.params(), grads))
            current = current.with_params(params)
    return current


# --- checkpoints -----------------------------------------------------------

def _format_row(values: np.ndarray) -> str:
    return " ".join(repr(float(x)) for x in values)


def save_classifier(clf: LinearClassifier) -> str:
    """Render a classifier as its text checkpoint."""
    header = f"DIM {clf.dim} CLASSES {clf.num_classes}"
    if clf.has_hidden:
        header += f" HIDDEN {clf.hidden_weights.shape[0]}"
    lines = [header]
    if clf.has_hidden:
        lines += [_format_row(row) for row in clf.hidden_weights]
        lines.append(_format_row(clf.hidden_bias))
    lines += [_format_row(row) for row in clf.weights]
    lines.append(_format_row(clf.bias))
    return "\n".join(lines) + "\n"


def load_classifier(text: str) -> LinearClassifier:
    """Parse a text checkpoint produced by :func:`save_classifier`."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty checkpoint")
    head = lines[0].split()
    hidden = 0
    if len(head) == 4 and head[0] == "DIM" and head[2] == "CLASSES":
        pass
    elif len(head) == 6 and head[0] == "DIM" and head[2] == "CLASSES" and head[4] == "HIDDEN":
        hidden = int(head[5])
    else:
        raise ValueError(f"malformed checkpoint header {lines[0]!r}")
    dim, classes = int(head[1]), int(head[3])

    rows = [np.array([float(x) for x in line.split()]) for line in lines[1:]]
    expected = classes + 1 + (hidden + 1 if hidden else 0)
    if len(rows) != expected:
        raise ValueError(f"expected {expected} parameter rows, got {len(rows)}")
    at = 0
    hidden_w = hidden_b = None
    if hidden:
        hidden_w = np.stack(rows[:hidden])
        hidden_b = rows[hidden]
        at = hidden + 1
        if hidden_w.shape != (hidden, dim) or hidden_b.shape != (hidden,):
            raise ValueError("hidden layer shape disagrees with the header")
    weights = np.stack(rows[at:at + classes])
    bias = rows[at + classes]
    width = hidden if hidden else dim
    if weights.shape != (classes, width) or bias.shape != (classes,):
        raise ValueError("parameter shapes disagree with the header")
    return LinearClassifier(weights, bias, hidden_w, hidden_b)
