"""Beep MIS Lab - ビーピングモデル MIS / 貪欲彩色シミュレータ"""
