from __future__ import annotations

HELP_TEXT = """Embedded topic model for single-cell expression

Subcommands:
- synth   write a planted-topic synthetic dataset
- train   preprocess, build neighbor lists and train; writes a run directory
- eval    interpretability metrics, enrichment tables and clustering scores for a run
- report  check an evaluation directory against the report schema and summarise it

Run `main.py <subcommand> --help` for the flags of each subcommand.
"""


MESSAGES = {
    "status_synth_done": "Wrote {n_cells} cells x {n_genes} genes ({n_topics} planted topics) to {out}",
    "status_train_start": "Training on {n_cells} cells x {n_genes} genes (K={n_topics}, epochs={epochs})",
    "status_train_done": "Finished training: final loss {total:.6f}; outputs in {out}",
    "status_eval_done": "Wrote evaluation for {n_topics} topics to {out}",
    "status_report_ok": "Report {path} matches the schema",
    "report_metric_line": "{metric:<7} {value:.4f}",
    "report_cluster_line": "{mode:<7} ARI {ari:.4f}  NMI {nmi:.4f}",
    "report_flag_negative_tc": "warning: mean topic coherence is negative",
    "warn_gmt_vocabulary": "GMT file {path}: kept {kept} of {total} pathways after restricting to the model vocabulary",
    "error_gmt_vocabulary": "no pathway shares a gene with the model vocabulary",
    "error_report_invalid": "report does not match the schema: {problems}",
    "error_external_required": "--embedding is required unless --no-cve is given",
    "error_prefix": "error: {error}",
}


def msg(key: str, **kwargs: object) -> str:
    template = MESSAGES[key]
    return template.format(**kwargs)
