"""Tests for correlation, refinement and the tracker."""
