"""Test suite for worstclass_boost."""
