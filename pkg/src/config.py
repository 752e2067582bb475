"""
Configuration settings for DelassusBench
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

class Config:
    # Application Configuration
    APP_NAME = os.getenv('APP_NAME', 'DelassusBench')
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

    # Verification Configuration
    DEFAULT_SEED = int(os.getenv('DELASSUS_SEED', '0'))
    DEFAULT_TOLERANCE = float(os.getenv('DELASSUS_TOLERANCE', '1e-8'))
    VERIFY_SAMPLES = int(os.getenv('DELASSUS_VERIFY_SAMPLES', '10'))

    # Benchmark Configuration
    SLOPE_TAIL = int(os.getenv('DELASSUS_SLOPE_TAIL', '4'))
    BENCH_WORKERS = int(os.getenv('DELASSUS_BENCH_WORKERS', '1'))
    OUTPUT_DIR = os.getenv('DELASSUS_OUTPUT_DIR', 'results')
    MATRIX_DIGITS = int(os.getenv('DELASSUS_MATRIX_DIGITS', '17'))

    # Generator Defaults (uniform rods)
    LINK_MASS = float(os.getenv('DELASSUS_LINK_MASS', '1.0'))
    LINK_LENGTH = float(os.getenv('DELASSUS_LINK_LENGTH', '1.0'))
    LINK_WIDTH = float(os.getenv('DELASSUS_LINK_WIDTH', '0.1'))
    BRANCH_LENGTH = int(os.getenv('DELASSUS_BRANCH_LENGTH', '7'))

    # Algorithms, in oracle-first order
    ALGORITHMS = [
        'naive',
        'ltl',
        'pv_osim',
        'efpa',
        'pv_osimr'
    ]

    # Benchmark families
    BENCH_FAMILIES = [
        'stem_branches',
        'chain_md',
        'chain_all_constrained',
        'custom'
    ]

    # CSV schema written by the bench suites
    CSV_COLUMNS = [
        'family',
        'param',
        'algorithm',
        'n_b',
        'n',
        'm',
        'd',
        'mul',
        'add_sub',
        'div',
        'sqrt',
        'total'
    ]
