"""Dual-stage content moderation for TV search.

Stage one is a lexicon-driven heuristic filter with time-adaptive
sensitivity scores; stage two validates flagged query-result pairs with
an LLM (or a deterministic mock) and feeds the verdicts back into the
lexicon scores. Human reviewers can override any machine verdict.
"""

__version__ = "0.1.0"
