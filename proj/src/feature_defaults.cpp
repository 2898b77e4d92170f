#include "freephish/features.hpp"

namespace freephish {

namespace {

const char* const kCredentialKeywords[] = {
    "password", "passwd",   "passcode", "login",       "sign-in", "register",
    "username", "userid",   "email",    "phone",       "ssn",     "social security",
    "card number", "cvv",   "expiry",   "one-time",    "account number",
};

const char* const kUrlKeywords[] = {
    "claim",   "login",   "free",     "verify",   "secure",   "account", "update",  "confirm",
    "support", "bank",    "signin",   "wallet",   "gift",     "prize",   "reward",  "bonus",
    "recover", "unlock",  "suspend",  "billing",  "payment",  "invoice", "password", "security",
    "alert",   "service", "help",     "validate", "webmail",  "office",
};

// name, official domain
const char* const kBrands[][2] = {
    {"PayPal", "paypal.com"},
    {"Microsoft", "microsoft.com"},
    {"Office365", "office.com"},
    {"Outlook", "outlook.com"},
    {"OneDrive", "onedrive.live.com"},
    {"Apple", "apple.com"},
    {"iCloud", "icloud.com"},
    {"Google", "google.com"},
    {"Gmail", "gmail.com"},
    {"Facebook", "facebook.com"},
    {"Instagram", "instagram.com"},
    {"WhatsApp", "whatsapp.com"},
    {"Twitter", "twitter.com"},
    {"LinkedIn", "linkedin.com"},
    {"Amazon", "amazon.com"},
    {"Netflix", "netflix.com"},
    {"Spotify", "spotify.com"},
    {"Adobe", "adobe.com"},
    {"Dropbox", "dropbox.com"},
    {"DocuSign", "docusign.com"},
    {"Yahoo", "yahoo.com"},
    {"AOL", "aol.com"},
    {"Chase", "chase.com"},
    {"Bank of America", "bankofamerica.com"},
    {"Wells Fargo", "wellsfargo.com"},
    {"Citibank", "citi.com"},
    {"Capital One", "capitalone.com"},
    {"American Express", "americanexpress.com"},
    {"Discover", "discover.com"},
    {"US Bank", "usbank.com"},
    {"PNC", "pnc.com"},
    {"TD Bank", "td.com"},
    {"Truist", "truist.com"},
    {"Navy Federal", "navyfederal.org"},
    {"USAA", "usaa.com"},
    {"Santander", "santander.co.uk"},
    {"Barclays", "barclays.co.uk"},
    {"HSBC", "hsbc.com"},
    {"Lloyds", "lloydsbank.com"},
    {"NatWest", "natwest.com"},
    {"Halifax", "halifax.co.uk"},
    {"Monzo", "monzo.com"},
    {"Revolut", "revolut.com"},
    {"ING", "ing.com"},
    {"BBVA", "bbva.com"},
    {"Deutsche Bank", "deutsche-bank.de"},
    {"Commerzbank", "commerzbank.de"},
    {"Sparkasse", "sparkasse.de"},
    {"Credit Agricole", "credit-agricole.fr"},
    {"BNP Paribas", "bnpparibas.com"},
    {"Societe Generale", "societegenerale.com"},
    {"Intesa Sanpaolo", "intesasanpaolo.com"},
    {"UniCredit", "unicredit.it"},
    {"Rabobank", "rabobank.nl"},
    {"ABN AMRO", "abnamro.nl"},
    {"Nordea", "nordea.com"},
    {"Desjardins", "desjardins.com"},
    {"RBC", "rbc.com"},
    {"Scotiabank", "scotiabank.com"},
    {"CIBC", "cibc.com"},
    {"BMO", "bmo.com"},
    {"Interac", "interac.ca"},
    {"Commonwealth Bank", "commbank.com.au"},
    {"Westpac", "westpac.com.au"},
    {"ANZ", "anz.com"},
    {"NAB", "nab.com.au"},
    {"Itau", "itau.com.br"},
    {"Bradesco", "bradesco.com.br"},
    {"Banco do Brasil", "bb.com.br"},
    {"Caixa", "caixa.gov.br"},
    {"State Bank of India", "onlinesbi.sbi"},
    {"HDFC Bank", "hdfcbank.com"},
    {"ICICI Bank", "icicibank.com"},
    {"Standard Bank", "standardbank.co.za"},
    {"Absa", "absa.co.za"},
    {"Mastercard", "mastercard.com"},
    {"Visa", "visa.com"},
    {"Venmo", "venmo.com"},
    {"Cash App", "cash.app"},
    {"Zelle", "zellepay.com"},
    {"Stripe", "stripe.com"},
    {"Square", "squareup.com"},
    {"Coinbase", "coinbase.com"},
    {"Binance", "binance.com"},
    {"Kraken", "kraken.com"},
    {"Blockchain", "blockchain.com"},
    {"MetaMask", "metamask.io"},
    {"Trust Wallet", "trustwallet.com"},
    {"Ledger", "ledger.com"},
    {"Trezor", "trezor.io"},
    {"OpenSea", "opensea.io"},
    {"Uniswap", "uniswap.org"},
    {"PancakeSwap", "pancakeswap.finance"},
    {"Crypto.com", "crypto.com"},
    {"DHL", "dhl.com"},
    {"FedEx", "fedex.com"},
    {"UPS", "ups.com"},
    {"USPS", "usps.com"},
    {"Royal Mail", "royalmail.com"},
    {"Canada Post", "canadapost-postescanada.ca"},
    {"Australia Post", "auspost.com.au"},
    {"La Poste", "laposte.fr"},
    {"Correos", "correos.es"},
    {"eBay", "ebay.com"},
    {"Walmart", "walmart.com"},
    {"Costco", "costco.com"},
    {"Best Buy", "bestbuy.com"},
    {"Alibaba", "alibaba.com"},
    {"AliExpress", "aliexpress.com"},
    {"Steam", "steampowered.com"},
    {"Roblox", "roblox.com"},
    {"Epic Games", "epicgames.com"},
    {"Discord", "discord.com"},
    {"Telegram", "telegram.org"},
    {"TikTok", "tiktok.com"},
    {"Snapchat", "snapchat.com"},
    {"Verizon", "verizon.com"},
    {"AT&T", "att.com"},
    {"T-Mobile", "t-mobile.com"},
    {"Comcast", "xfinity.com"},
    {"Vodafone", "vodafone.com"},
    {"Swisscom", "swisscom.ch"},
    {"Telstra", "telstra.com.au"},
    {"GoDaddy", "godaddy.com"},
    {"Namecheap", "namecheap.com"},
    {"Zoom", "zoom.us"},
    {"Salesforce", "salesforce.com"},
    {"IRS", "irs.gov"},
    {"HMRC", "hmrc.gov.uk"},
    {"Booking.com", "booking.com"},
    {"Airbnb", "airbnb.com"},
    {"Emirates", "emirates.com"},
};

}  // namespace

ExtractorConfig ExtractorConfig::defaults() {
    ExtractorConfig c;
    for (const char* k : kCredentialKeywords) c.credential_keywords.emplace_back(k);
    for (const char* k : kUrlKeywords) c.url_keywords.emplace_back(k);
    for (const auto& b : kBrands) c.brands.push_back({b[0], b[1]});
    return c;
}

}  // namespace freephish
