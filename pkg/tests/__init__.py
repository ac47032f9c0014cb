"""Tests for nematic_mf."""
