"""
Command-line surface: run configuration, artifact persistence and subcommands
"""
from .run_config import RunConfig, load_run_config, parse_overrides
from .strategies import StrategySpec, expand_steps, label_strategy, parse_strategy
from .persistence import (
    load_checkpoint,
    load_prototype,
    read_representations,
    save_checkpoint,
    save_prototype,
    summary_digest,
    write_representations,
)
from .commands import (
    bench_table,
    cmd_bench,
    cmd_eval,
    cmd_gen,
    cmd_gradcheck,
    cmd_labels,
    cmd_prototype,
    cmd_stats,
    cmd_train,
    load_run_data,
    resolve_prototype,
    run_training,
)
