# core package: shared helpers for the kh toolkit
