import logging
import sys

import click

from constants import DEFAULT_EPSILON, DEFAULT_MAX_TONES, DEFAULT_RESIDUAL_FRACTION, LOG_LEVEL
from cli.cli_service import CliService, SYNTH_PRESETS
from models import InputDocumentError, ToneSplitError, REFINE_METHODS, FIT_STRATEGIES, REFINE_ROBUST, FIT_JOINT


logger = logging.getLogger(__name__)

EXIT_INPUT_ERROR = 3
EXIT_DECOMPOSITION_ERROR = 4


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--in", "in_path", type=click.Path(dir_okay=False), help="Sample file, one value per line.")
@click.option("--synth", type=click.Choice(sorted(SYNTH_PRESETS)), help="Built-in synthetic test signal.")
@click.option("--tones", type=click.IntRange(min=1), help="Known number of tones M.")
@click.option("--blind", is_flag=True, help="Estimate the number of tones from the residual energy.")
@click.option("--epsilon", type=click.FloatRange(min=0.0, max=1.0, min_open=True), default=DEFAULT_EPSILON, show_default=True,
              help="Refinement resolution as a fraction of a bin.")
@click.option("--max-tones", type=click.IntRange(min=1), default=DEFAULT_MAX_TONES, show_default=True)
@click.option("--residual-threshold", type=click.FloatRange(min=0.0, max=1.0, min_open=True, max_open=True), default=DEFAULT_RESIDUAL_FRACTION, show_default=True,
              help="Blind mode stops once residual energy <= threshold * original energy.")
@click.option("--refiner", type=click.Choice(REFINE_METHODS), default=REFINE_ROBUST, show_default=True)
@click.option("--fit-strategy", type=click.Choice(FIT_STRATEGIES), default=FIT_JOINT, show_default=True)
@click.option("--dump-spectrum", type=click.Path(dir_okay=False), help="CSV of the initial and residual spectra.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write the JSON result here instead of stdout.")
@click.option("--seed", type=int, default=0, show_default=True, help="Noise seed (--synth only).")
@click.option("--noise", type=click.FloatRange(min=0.0), default=0.0, show_default=True, help="Noise sigma (--synth only).")
@click.option("--sample-rate", type=click.FloatRange(min=0.0, min_open=True), help="Sample rate in Hz (--synth only).")
def run(in_path, synth, tones, blind, epsilon, max_tones, residual_threshold, refiner, fit_strategy,
        dump_spectrum, out_path, seed, noise, sample_rate):
    """Decompose a signal into sinusoidal tones."""
    logging.basicConfig(level=LOG_LEVEL, stream=sys.stderr)

    if (in_path is None) == (synth is None):
        raise click.UsageError("Give exactly one of --in or --synth.")
    if (tones is None) == (not blind):
        raise click.UsageError("Give exactly one of --tones or --blind.")
    if in_path is not None and sample_rate is not None:
        raise click.UsageError("--sample-rate applies to --synth only; put '# sample_rate=<Hz>' in the input file instead.")

    service = CliService()
    try:
        cfg = service.utils.build_config(
            tones=tones,
            blind=blind,
            epsilon=epsilon,
            max_tones=max_tones,
            residual_threshold=residual_threshold,
            refiner=refiner,
            fit_strategy=fit_strategy,
        )
    except ValueError as e:
        raise click.UsageError(str(e))

    try:
        if synth is not None:
            x, _ = service.synthesize_preset(synth, noise=noise, seed=seed)
            source = f"synth:{synth}"
        else:
            x, sample_rate = service.read_input(in_path)
            source = in_path
    except (InputDocumentError, ValueError) as e:
        _fail(EXIT_INPUT_ERROR, str(e))

    try:
        result, spectra = service.decompose_with_dump(x, cfg)
    except (ToneSplitError, ValueError) as e:
        _fail(EXIT_DECOMPOSITION_ERROR, str(e))

    document = service.utils.result_to_document(result, cfg, sample_rate=sample_rate, source=source)
    try:
        text = service.write_results(document, out_path=out_path, spectra=spectra, dump_path=dump_spectrum)
    except OSError as e:
        _fail(EXIT_INPUT_ERROR, f"Cannot write output: {e}")
    if out_path is None:
        click.echo(text, nl=False)


if __name__ == "__main__":
    run()
