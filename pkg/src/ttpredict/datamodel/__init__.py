"""Data model for matches, rallies and features."""
