"""Scikit-learn style classifier: embed graphs, then vote against training anchors."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.model_selection import train_test_split
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graphs, check_labels
from .embed.checkpoint import Checkpoint
from .embed.model import EmbedderConfig, embed_many
from .embed.training import TrainConfig, train
from .features import NodeFeatureTransformer
from .knn import AnchorIndex, classify_many


class GraphEmbeddingClassifier(ClassifierMixin, BaseEstimator):
    """Triplet-trained graph-attention embedder with per-class dynamic-k anchors.

    ``fit`` trains on ``X``/``y`` with early stopping on ``(X_val, y_val)``; when
    no validation set is given a stratified ``validation_fraction`` of the
    training graphs is held out for it. All training graphs then serve as
    anchors.
    """

    def __init__(self, hidden=8, heads=4, layers=3, fc_hidden=8, pooling="mean",
                 scaling="log1p_standardized", lr=0.003, weight_decay=5e-3, margin=1.0,
                 max_epochs=200, patience=20, min_delta=1e-4, triplets_per_epoch=200,
                 batch_size=25, val_triplets=200, validation_fraction=0.2, random_state=0):
        self.hidden = hidden
        self.heads = heads
        self.layers = layers
        self.fc_hidden = fc_hidden
        self.pooling = pooling
        self.scaling = scaling
        self.lr = lr
        self.weight_decay = weight_decay
        self.margin = margin
        self.max_epochs = max_epochs
        self.patience = patience
        self.min_delta = min_delta
        self.triplets_per_epoch = triplets_per_epoch
        self.batch_size = batch_size
        self.val_triplets = val_triplets
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _train_config(self) -> TrainConfig:
        return TrainConfig(lr=self.lr, weight_decay=self.weight_decay, margin=self.margin,
                           max_epochs=self.max_epochs, patience=self.patience, min_delta=self.min_delta,
                           triplets_per_epoch=self.triplets_per_epoch, batch_size=self.batch_size,
                           val_triplets=self.val_triplets, seed=int(self.random_state))

    def fit(self, X, y, X_val=None, y_val=None):
        graphs = check_graphs(X)
        y = check_labels(y, len(graphs))
        if (X_val is None) != (y_val is None):
            raise ValueError("X_val and y_val must be given together")
        if X_val is None:
            idx = np.arange(len(graphs))
            tr, va = train_test_split(idx, test_size=self.validation_fraction, stratify=y,
                                      random_state=int(self.random_state) % 2**32)
            fit_graphs, fit_y = [graphs[i] for i in tr], y[tr]
            val_graphs, val_y = [graphs[i] for i in va], y[va]
        else:
            fit_graphs, fit_y = graphs, y
            val_graphs = check_graphs(X_val)
            val_y = check_labels(y_val, len(val_graphs))

        self.classes_ = np.array(sorted(set(y.tolist()) | set(val_y.tolist()), key=str))
        self.features_ = NodeFeatureTransformer(self.scaling).fit(fit_graphs)
        self.embedder_config_ = EmbedderConfig(hidden=self.hidden, heads=self.heads, layers=self.layers,
                                               fc_hidden=self.fc_hidden, out_dim=len(self.classes_),
                                               pooling=self.pooling)
        result = train(fit_graphs, self.features_.transform(fit_graphs), fit_y.tolist(),
                       val_graphs, self.features_.transform(val_graphs), val_y.tolist(),
                       self.embedder_config_, self._train_config())
        self.params_ = result.params
        self.history_ = result.history
        self.best_epoch_ = result.best_epoch
        self.anchor_index_ = AnchorIndex.build(self._embed(graphs), y.tolist(), self.classes_.tolist())
        return self

    def _embed(self, graphs) -> np.ndarray:
        return embed_many(graphs, self.features_.transform(graphs), self.params_, self.embedder_config_)

    def transform(self, X) -> np.ndarray:
        """Graph embeddings, one row per graph."""
        check_is_fitted(self, "params_")
        return self._embed(check_graphs(X))

    def predict(self, X) -> np.ndarray:
        return np.asarray(classify_many(self.transform(X), self.anchor_index_))

    def checkpoint(self) -> Checkpoint:
        """Weights plus everything ``from_checkpoint`` needs to predict, anchors included."""
        check_is_fitted(self, "params_")
        extra = {"scaling": self.scaling, "hyperparameters": self.get_params()}
        if self.scaling == "log1p_global":
            extra["feature_mean"] = [float(x).hex() for x in self.features_.mean_]
            extra["feature_scale"] = [float(x).hex() for x in self.features_.scale_]
        idx = self.anchor_index_
        extra["anchors"] = {"labels": [str(c) for c in idx.labels],
                            "embeddings": [[float(x).hex() for x in row] for row in idx.embeddings]}
        return Checkpoint(self.embedder_config_, self.params_, self._train_config().to_dict(),
                          int(self.random_state), [str(c) for c in self.classes_], extra)

    @classmethod
    def from_checkpoint(cls, ck: Checkpoint) -> "GraphEmbeddingClassifier":
        extra = ck.extra
        clf = cls(**extra.get("hyperparameters", {}))
        clf.scaling = extra.get("scaling", clf.scaling)
        clf.classes_ = np.array(ck.classes)
        clf.embedder_config_ = ck.config
        clf.params_ = ck.params
        clf.history_ = []
        feats = NodeFeatureTransformer(clf.scaling)
        feats.n_features_out_ = 4
        if clf.scaling == "log1p_global":
            feats.mean_ = np.array([float.fromhex(x) for x in extra["feature_mean"]])
            feats.scale_ = np.array([float.fromhex(x) for x in extra["feature_scale"]])
        clf.features_ = feats
        anchors = extra["anchors"]
        emb = np.array([[float.fromhex(x) for x in row] for row in anchors["embeddings"]], dtype=np.float64)
        clf.anchor_index_ = AnchorIndex.build(emb, anchors["labels"], ck.classes)
        return clf
