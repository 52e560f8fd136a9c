# utility functions

import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor

# logging level
LOGLEVEL = os.environ.get('LOGLEVEL', 'INFO').upper()
logging.basicConfig(level=LOGLEVEL)

# Env variables
DIRAC_NL_ABS_TOL = os.environ.get("DIRAC_NL_ABS_TOL") or "1e-10"
DIRAC_NL_ABS_TOL = float(DIRAC_NL_ABS_TOL)
DIRAC_NL_REL_TOL = os.environ.get("DIRAC_NL_REL_TOL") or "1e-9"
DIRAC_NL_REL_TOL = float(DIRAC_NL_REL_TOL)
DIRAC_NL_MAX_DEPTH = os.environ.get("DIRAC_NL_MAX_DEPTH") or "40"
DIRAC_NL_MAX_DEPTH = int(DIRAC_NL_MAX_DEPTH)
DIRAC_NL_ORACLE_POINTS = os.environ.get("DIRAC_NL_ORACLE_POINTS") or "4000"
DIRAC_NL_ORACLE_POINTS = int(DIRAC_NL_ORACLE_POINTS)
DIRAC_NL_MESSAGES_LANGUAGE = os.environ.get("DIRAC_NL_MESSAGES_LANGUAGE") or "en"

MESSAGES_FOLDER = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "nonloc", "messages")
SIGNIFICANT_DIGITS = 12

##########################################################
# PARALLELISM
##########################################################

def get_thread_count():
    """Worker cap from DIRAC_NL_THREADS, read at call time so tests can patch it."""
    raw = os.environ.get("DIRAC_NL_THREADS") or "1"
    try:
        threads = int(raw)
    except ValueError:
        logging.warning(f"[util__module] get_thread_count: ignoring non-integer DIRAC_NL_THREADS={raw!r}.")
        return 1
    return max(1, threads)


def parallel_map(func, items, label="parallel_map"):
    """
    Apply func to every item, keeping input order.

    Parameters:
    func (callable): pure function of one argument.
    items (iterable): arguments.
    label (str): tag used in the timing log line.

    Returns:
    list: func(item) for each item, in order.
    """
    start_time = time.time()
    items = list(items)
    threads = min(get_thread_count(), max(1, len(items)))
    if threads == 1:
        results = [func(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            results = list(executor.map(func, items))
    response_time = round(time.time() - start_time, 2)
    logging.debug(f"[util__module] {label}: finished {len(items)} evaluations on {threads} thread(s) in {response_time} seconds.")
    return results

##########################################################
# FORMATTING FUNCTIONS
##########################################################

def format_number(value, digits=SIGNIFICANT_DIGITS):
    """Locale-free fixed significant-digit rendering; -0 prints as 0."""
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"cannot format non-finite value {value}")
    if value == 0.0:
        value = 0.0
    return format(value, f".{digits}g")


def format_row(values, digits=SIGNIFICANT_DIGITS):
    return ",".join(format_number(v, digits) for v in values)

##########################################################
# MESSAGES FUNCTIONS
##########################################################

def get_message(message, **kwargs):
    messages_file = os.path.join(MESSAGES_FOLDER, f"{DIRAC_NL_MESSAGES_LANGUAGE[:2]}.json")
    if not os.path.exists(messages_file):
        messages_file = os.path.join(MESSAGES_FOLDER, "en.json")
    with open(messages_file, 'r') as f:
        json_data = f.read()
    messages_dict = json.loads(json_data)
    text = messages_dict[message]
    return text.format(**kwargs) if kwargs else text
