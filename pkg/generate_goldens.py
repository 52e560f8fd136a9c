import argparse
import logging
import os
import time

from nonloc.cli import EXIT_OK, main as run_cli

GOLDEN_FOLDER = os.path.join("tests", "golden")
GOLDEN_RUNS = {
    "profile_d1.csv": ["profile", "--d", "1"],
    "sweep.csv": ["sweep"],
}


def main(golden_folder=GOLDEN_FOLDER, only=None):
    """
    Regenerates the golden CSV files pinned by the regression tests.

    Args:
        golden_folder (str, optional): Destination folder for the golden files.
        only (list, optional): Subset of golden file names to regenerate.

    Raises:
        RuntimeError: If a run exits with a non-zero code; the previous golden is kept.
    """
    logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
    logging.info(f"Starting golden generation in {golden_folder}.")
    os.makedirs(golden_folder, exist_ok=True)

    start_time = time.time()

    for name, argv in GOLDEN_RUNS.items():
        if only and name not in only:
            continue
        path = os.path.join(golden_folder, name)
        code = run_cli(argv + ["--out", path])
        if code != EXIT_OK:
            raise RuntimeError(f"{' '.join(argv)} exited with code {code}; {path} left untouched")
        logging.info(f"Wrote {path}.")

    response_time = time.time() - start_time
    logging.info(f"Finished golden generation. {round(response_time,2)} seconds")


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='Script to regenerate the golden regression files.')
    parser.add_argument('-g', '--golden_folder', default=GOLDEN_FOLDER, help='Destination folder')
    parser.add_argument('-o', '--only', nargs='*', default=None, help='Golden file names to regenerate')
    args = parser.parse_args()

    main(golden_folder=args.golden_folder, only=args.only)
