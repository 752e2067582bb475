#!/usr/bin/env python3
"""
Demo script for DelassusBench
Runs every workflow end to end on built-in mechanisms
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from src.config import Config
from src.utils.log import configure_logging
from src.workflows.delassus_workflow import DelassusWorkflow, format_info, load_mechanism

SAMPLE_URDF = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'sample_robot.urdf')

def test_configuration():
    """Show configuration"""
    print("🔧 Configuration...")
    print(f"   Seed: {Config.DEFAULT_SEED}")
    print(f"   Tolerance: {Config.DEFAULT_TOLERANCE}")
    print(f"   Verify samples: {Config.VERIFY_SAMPLES}")
    print(f"   Algorithms: {Config.ALGORITHMS}")
    print(f"   Bench families: {Config.BENCH_FAMILIES}")
    print("   ✅ Configuration loaded successfully")
    print()

def test_info(workflow):
    """Index sets of the six-link example tree"""
    print("🌳 Index sets of the example tree...")
    result = workflow.info(load_mechanism(gen='example'))
    if result['success']:
        for line in format_info(result).splitlines():
            print(f"   {line}")
        print("   ✅ Index sets computed")
    else:
        print(f"   ❌ Info failed: {result['error']}")
    print()

def test_verify(workflow):
    """Agreement of the five algorithms"""
    print("🔍 Verifying algorithm agreement...")
    for spec in ('example', 'humanoid', 'random:20:4'):
        result = workflow.verify(load_mechanism(gen=spec), samples=3)
        if result['success']:
            print(f"   ✅ {spec}: max relative deviation {result['max_deviation']:.2e}")
        else:
            print(f"   ❌ {spec}: {result['error']}")
    print()

def test_urdf(workflow):
    """Delassus matrix of the sample URDF arm"""
    print("🤖 Loading sample URDF...")
    try:
        mechanism = load_mechanism(model=SAMPLE_URDF, constrain='tip:connect')
        result = workflow.compute(mechanism, 'pv_osimr', 'random')
        if result['success']:
            print(f"   Links: {mechanism[0].n_b}, DoF: {mechanism[0].n}")
            print(f"   Tip contact Delassus diagonal: {result['matrix'].diagonal().round(4).tolist()}")
            print("   ✅ URDF processed successfully")
        else:
            print(f"   ❌ Compute failed: {result['error']}")
    except Exception as e:
        print(f"   ❌ URDF loading failed: {str(e)}")
    print()

def test_counts(workflow):
    """Operation counts on the humanoid"""
    print("🧮 Counting operations on the humanoid...")
    result = workflow.count(load_mechanism(gen='humanoid'))
    if result['success']:
        for line in result['table'].splitlines():
            print(f"   {line}")
    else:
        print(f"   ❌ Count failed: {result['error']}")
    print()

def test_bench(workflow):
    """A small constraint-dominated scaling run"""
    print("📈 Benchmarking chain_md for k = 4..8...")
    result = workflow.bench('chain_md', [4, 5, 6, 7, 8])
    if result['success']:
        for line in result['summary'].splitlines():
            print(f"   {line}")
    else:
        print(f"   ❌ Bench failed: {result['error']}")
    print()

def main():
    """Run all demos"""
    configure_logging('WARNING')
    print("🚀 DelassusBench Demo")
    print("=" * 50)
    print()

    workflow = DelassusWorkflow(verbose=False)
    test_configuration()
    test_info(workflow)
    test_verify(workflow)
    test_urdf(workflow)
    test_counts(workflow)
    test_bench(workflow)

    print("🎯 Next Steps:")
    print("   1. Run the test suite: python -m pytest")
    print("   2. Reproduce a scaling suite: python cli.py bench --family chain-md --k 6..14:2")
    print("   3. Load your own robot: python cli.py info --model robot.urdf --base floating")

if __name__ == "__main__":
    main()
