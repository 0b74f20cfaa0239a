"""amlgraph: graph machine learning for illicit-transaction detection.

Reproduces a GNN-vs-baselines pipeline on the Elliptic Bitcoin dataset:
a minimal autodiff engine, GCN / GAT / GAT-ResNet models, logistic
regression and random forest baselines, weighted-loss training with a
temporal split, and a five-metric evaluation suite, all driven by the
``amlgraph`` CLI.
"""

__version__ = "0.1.0"
