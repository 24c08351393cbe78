"""Ingestion of match data from generators and external sources."""
