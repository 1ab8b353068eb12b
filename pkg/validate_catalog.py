"""
Validation script to ensure command catalog and registry are in sync.

Run this script to verify that:
1. All commands in the catalog are registered
2. All registered commands are in the catalog
3. Command descriptions match between catalog and registry

Usage:
    python validate_catalog.py
"""

import sys
import os

# Add the parent directory to the path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from cli import setup_registry
from svine.tools.command_catalog import get_all_command_names, get_command_description


def validate() -> bool:
    """Validate catalog and registry consistency."""
    print("\n" + "=" * 60)
    print("Command Catalog Validation")
    print("=" * 60 + "\n")

    registry = setup_registry()

    catalog_names = set(get_all_command_names())
    registered_names = set(registry.list_commands().keys())

    missing_from_registry = catalog_names - registered_names
    extra_in_registry = registered_names - catalog_names

    print(f"📊 Catalog commands: {len(catalog_names)}")
    print(f"📊 Registered commands: {len(registered_names)}\n")

    if missing_from_registry:
        print("❌ Commands in catalog but NOT registered:")
        for name in sorted(missing_from_registry):
            print(f"   - {name}")
        print()

    if extra_in_registry:
        print("⚠️  Commands registered but NOT in catalog:")
        for name in sorted(extra_in_registry):
            print(f"   - {name}")
        print()

    description_mismatches = [
        name
        for name in catalog_names & registered_names
        if get_command_description(name) != registry.list_commands()[name]
    ]
    if description_mismatches:
        print("⚠️  Description mismatches found:")
        for name in sorted(description_mismatches):
            print(f"   - {name}")
        print()

    print("-" * 60)
    if not missing_from_registry and not extra_in_registry and not description_mismatches:
        print("✅ SUCCESS: Catalog and registry are perfectly in sync!")
        print("-" * 60 + "\n")
        return True
    print("❌ FAILED: Inconsistencies detected")
    print("-" * 60)
    print("\nRecommended actions:")
    if missing_from_registry:
        print("1. Register missing commands in cli.setup_registry")
    if extra_in_registry:
        print("2. Add extra commands to command_catalog.py or remove them from cli.py")
    if description_mismatches:
        print("3. Use get_command_description() when registering in cli.py")
    print()
    return False


if __name__ == "__main__":
    success = validate()
    sys.exit(0 if success else 1)
