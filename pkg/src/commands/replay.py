"""
Replay command.

Commands:
    replay <file.manifest>:
        Re-runs the command line recorded in a run manifest, rewriting the
        recorded outputs. The recorded seed and thread count are passed as
        global options, so the replay does not depend on EXOCI_SEED or
        EXOCI_THREADS.
"""

import click
from models.manifest import RunManifest
from utils.errors import ManifestError
from utils.logger import get_logger

logger = get_logger("replay")


@click.command("replay")
@click.argument("manifest", type=click.Path(dir_okay=False))
@click.pass_context
def replay(ctx, manifest):
    """Reproduce the outputs recorded in MANIFEST."""

    recorded = RunManifest.load(manifest)
    if not recorded.argv or recorded.command == "replay":
        raise ManifestError("manifest records no replayable command")
    logger.info("replaying '%s' from %s", recorded.command, manifest)
    root = ctx.find_root()
    # settings taken from the environment at record time are pinned; flags in argv still win
    pinned = ["--threads", str(recorded.threads)]
    if recorded.seed is not None:
        pinned = ["--seed", str(recorded.seed), *pinned]
    args = [*pinned, *recorded.argv]
    with root.command.make_context(root.info_name, args, obj={"argv": list(recorded.argv)}) as sub:
        root.command.invoke(sub)
