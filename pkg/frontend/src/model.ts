// Questionnaire data dictionary shared by the form and the API layer.

export interface ItemDefinition {
  code: string;     // canonical column code used by the scoring service
  number: number;   // 1-based position on the printed questionnaire
  label: string;    // clinician-facing name
  part: 'IB' | 'II';
}

export const SEVERITY_ANCHORS = ['normal', 'slight', 'mild', 'moderate', 'severe'] as const;

export const MAX_SEVERITY = 4;
export const AGE_MIN = 0;
export const AGE_MAX = 130;

export const ITEMS: readonly ItemDefinition[] = [
  { code: 'P1_SLPN', number: 1, label: 'Sleep Problems', part: 'IB' },
  { code: 'P1_SLPD', number: 2, label: 'Daytime Sleepiness', part: 'IB' },
  { code: 'P1_PAIN', number: 3, label: 'Pain and other sensations', part: 'IB' },
  { code: 'P1_URIN', number: 4, label: 'Urinary Problems', part: 'IB' },
  { code: 'P1_CNST', number: 5, label: 'Constipation problems', part: 'IB' },
  { code: 'P1_LTHD', number: 6, label: 'Light Headedness on standing', part: 'IB' },
  { code: 'P1_FATG', number: 7, label: 'Fatigue', part: 'IB' },
  { code: 'P2_SPCH', number: 8, label: 'Speech', part: 'II' },
  { code: 'P2_SALV', number: 9, label: 'Saliva and Drooling', part: 'II' },
  { code: 'P2_SWAL', number: 10, label: 'Chewing and Swallowing', part: 'II' },
  { code: 'P2_EAT', number: 11, label: 'Eating tasks', part: 'II' },
  { code: 'P2_DRES', number: 12, label: 'Dressing', part: 'II' },
  { code: 'P2_HYGN', number: 13, label: 'Hygiene', part: 'II' },
  { code: 'P2_HWRT', number: 14, label: 'Handwriting', part: 'II' },
  { code: 'P2_HOBB', number: 15, label: 'Doing Hobbies and other activities', part: 'II' },
  { code: 'P2_TURN', number: 16, label: 'Turning in bed', part: 'II' },
  { code: 'P2_TRMR', number: 17, label: 'Tremor', part: 'II' },
  { code: 'P2_RISE', number: 18, label: 'Getting out of bed/car/deep chair', part: 'II' },
  { code: 'P2_WALK', number: 19, label: 'Walking and balance', part: 'II' },
  { code: 'P2_FREZ', number: 20, label: 'Freezing', part: 'II' },
];

export const ITEM_CODES: readonly string[] = ITEMS.map((item) => item.code);
