"""Tests for the feature backbones."""
