"""Tests for myocardial tracking."""
