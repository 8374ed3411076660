#!/usr/bin/env python3
"""
Development helper script
"""

import subprocess
import sys

def run_command(command, description):
    """Run a command and handle errors"""
    print(f"🔧 {description}...")
    try:
        subprocess.run(command, shell=True, check=True)
        print(f"✅ {description} completed!")
    except subprocess.CalledProcessError as e:
        print(f"❌ {description} failed: {e}")
        sys.exit(1)

def main():
    if len(sys.argv) < 2:
        print("Usage: python scripts/dev.py [command]")
        print("Commands:")
        print("  setup    - Install dependencies and write a run config")
        print("  test     - Run the fast tests")
        print("  test-all - Run every test, including the slow sweeps")
        print("  lint     - Run linting")
        print("  format   - Format code")
        print("  run      - Run the pipeline on run.yaml")
        return

    command = sys.argv[1]

    if command == "setup":
        run_command("pip install -r requirements.txt", "Installing dependencies")
        run_command("python -m app.main config-template --output run.yaml", "Writing run.yaml")

    elif command == "test":
        run_command("pytest tests/ -v -m 'not slow'", "Running tests")

    elif command == "test-all":
        run_command("pytest tests/ -v", "Running all tests")

    elif command == "lint":
        run_command("flake8 app/", "Running linting")
        run_command("mypy app/", "Running type checking")

    elif command == "format":
        run_command("black app/ tests/", "Formatting code with Black")
        run_command("isort app/ tests/", "Sorting imports")

    elif command == "run":
        run_command("python -m app.main pipeline --config run.yaml --assert", "Running pipeline")

    else:
        print(f"Unknown command: {command}")

if __name__ == "__main__":
    main()
