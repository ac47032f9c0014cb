"""nematic_mf package."""
