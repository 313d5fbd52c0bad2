#!/usr/bin/env python3
"""
Setup script for the CP-ABE toolkit
"""

import os
import subprocess
import sys
from pathlib import Path

ENV_TEMPLATE = """# Pairing group (128-bit security on BLS12-381)
CPABE_SECURITY_LEVEL=128

# Storage Configuration
CPABE_AUTHORITY_DIR=authority
CPABE_STORE_DIR=data
CPABE_EXPORT_DIR=exports

# Logging Configuration
CPABE_LOG_LEVEL=WARNING

# Exposes internal randomness to tests; keep at 0
CPABE_DEBUG_HOOKS=0

# Benchmark Configuration
BENCH_RUNS=15
BENCH_WARMUP=3
BENCH_DOC_COUNT=100
BENCH_SEED=42
BENCH_ATTR_RANGE=5,10,15,20,25,30
BENCH_SIZE_RANGE_KB=100,200,300,400,500,600,700,800,900,1000
"""


def check_python_version():
    """Check if Python version is compatible"""
    if sys.version_info < (3, 9):
        print("Error: Python 3.9 or higher is required")
        print(f"Current version: {sys.version}")
        return False
    print(f"✓ Python version: {sys.version}")
    return True


def install_requirements():
    """Install required packages"""
    print("Installing required packages...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
        print("✓ Requirements installed successfully")
        return True
    except subprocess.CalledProcessError as e:
        print(f"Error installing requirements: {e}")
        return False


def create_directories():
    """Create necessary directories"""
    for directory in ["authority", "data", "exports"]:
        Path(directory).mkdir(exist_ok=True)
        print(f"✓ Created directory: {directory}")


def create_env_file():
    """Create .env file if it doesn't exist"""
    if not os.path.exists(".env"):
        with open(".env", "w") as f:
            f.write(ENV_TEMPLATE)
        print("✓ Created .env file")
    else:
        print("✓ .env file already exists")


def run_smoke_test():
    """Import the stack and build the pairing group"""
    print("Running smoke test...")
    try:
        from pairing_backend import group_setup
        from hybrid_envelope import Dek, CipherMode, sym_decrypt, sym_encrypt

        ctx = group_setup()
        print(f"✓ Pairing group ready: {ctx.group_id}")

        dek = Dek.generate()
        assert sym_decrypt(dek, sym_encrypt(dek, b"smoke", CipherMode.RND)) == b"smoke"
        print("✓ Symmetric layer working")
        return True
    except Exception as e:
        print(f"Error running smoke test: {e}")
        return False


def main():
    """Main setup function"""
    print("=" * 60)
    print("CP-ABE Toolkit - Setup")
    print("=" * 60)

    if not check_python_version():
        return False

    create_directories()
    create_env_file()

    if not install_requirements():
        return False

    if not run_smoke_test():
        return False

    print("=" * 60)
    print("Setup completed successfully!")
    print("=" * 60)
    print("Next steps:")
    print("1. Bootstrap the authority: python main.py setup --universe analyst,admin")
    print("2. Issue a key:             python main.py keygen --user ana --attrs analyst")
    print("3. Try the walkthrough:     python main.py demo")
    print("=" * 60)

    return True


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
