"""Experiment runners: model comparison, derived-feature ablation and pre-match prediction."""
